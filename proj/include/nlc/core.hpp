#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace nlc {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
using Vec2 = Vector2<double>;
using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = 3.14159265358979323846;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: malformed specs, violated preconditions. CLI exit code 1.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message)
      : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// A numerical assumption did not hold (monotonicity, containment, ...). CLI exit code 2.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A hypothesis gate refused the input, e.g. the boundary is not a local graph.
class HypothesisViolation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

inline Vec2 perp(const Vec2& v) { return {-v.y(), v.x()}; }

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace nlc

#pragma once

#include "nlc/radial.hpp"

#include <Eigen/Core>

#include <memory>

namespace nlc {

// How a field continues past the grid edge.
enum class Extension { zero, replicate };

// Linear convolution with a fixed (2K+1)^2 stencil centred at (K, K), by FFT.
// out(i, j) = sum_{a,b} w(a, b) in(i - a, j - b).
class Convolver {
 public:
  explicit Convolver(Eigen::ArrayXXd stencil);
  ~Convolver();
  Convolver(Convolver&&) noexcept;
  Convolver& operator=(Convolver&&) noexcept;

  int half_width() const;
  double stencil_sum() const;
  const Eigen::ArrayXXd& stencil() const;
  // With zero extension only the bounding box of the nonzeros (grown by K) is transformed,
  // which is exact because the stencil is finite. Not thread-safe: one Convolver per worker.
  Eigen::ArrayXXd apply(const Eigen::ArrayXXd& in, Extension ext = Extension::zero) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Cell integrals of a radial kernel on the lattice hZ^2: entry (a+K, b+K) holds the integral of
// mu(|z|) over the square of side h centred at h(a, b). Angular integration of the radial
// antiderivative is exact up to Gauss-Legendre error, including the singular centre cell.
Eigen::ArrayXXd kernel_stencil(const RadialProfile& p, double h, int K);

// Cell integrals of the heat kernel (4 pi t)^-1 exp(-|z|^2 / 4t), cut at `sigmas` standard
// deviations sqrt(2t) and renormalised to unit mass.
Eigen::ArrayXXd heat_stencil(double t, double h, double sigmas = 6.0);

// Smallest integer >= n whose prime factors are 2, 3, 5, 7.
int smooth_size(int n);

}  // namespace nlc

#pragma once

#include "nlc/core.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace nlc {

enum class KernelFamily { power_law_truncated, smooth_compact, two_sided_decay, indicator };

std::string to_string(KernelFamily f);
KernelFamily kernel_family_from_string(const std::string& s);

// Radial profile mu(rho), rho = |z|:
//   power_law_truncated  C rho^(alpha-n)                 on (0, r)
//   smooth_compact       C (1 - (rho/r)^2)               on (0, r)   (alpha unused)
//   two_sided_decay      C rho^(alpha-n) / (1 + rho^(alpha+alpha1)), optionally cut at r
//   indicator            C                               on (0, r)
// The support is open: mu(r) = 0.
struct KernelSpec {
  KernelFamily family = KernelFamily::power_law_truncated;
  int n = 2;
  double r = 1.0;
  double alpha = 1.0;
  double alpha1 = 1.0;
  double C = 1.0;

  bool compact() const { return std::isfinite(r); }
  // mu blows up at the origin.
  bool singular() const {
    return (family == KernelFamily::power_law_truncated || family == KernelFamily::two_sided_decay) &&
           alpha < n;
  }
  // mu jumps to zero at rho = r.
  bool has_jump() const {
    return compact() && family != KernelFamily::smooth_compact;
  }
  bool operator==(const KernelSpec&) const = default;
};

// Throws ValidationError naming the offending field.
void validate(const KernelSpec& k);

// Soft constraints that do not block evaluation, e.g. the beta + alpha > 1 condition
// for a boundary of Holder exponent beta.
std::vector<std::string> kernel_warnings(const KernelSpec& k, double holder_beta = 1.0);

// Surface area of the unit sphere in R^n.
double sphere_area(int n);
double ball_volume(int n);

template <typename Scalar>
Scalar profile(const KernelSpec& k, Scalar rho) {
  using std::pow;
  if (!(rho < k.r)) return Scalar(0);
  switch (k.family) {
    case KernelFamily::power_law_truncated:
      return k.C * pow(rho, k.alpha - k.n);
    case KernelFamily::smooth_compact: {
      const Scalar q = rho / k.r;
      return k.C * (Scalar(1) - q * q);
    }
    case KernelFamily::two_sided_decay:
      return k.C * pow(rho, k.alpha - k.n) / (Scalar(1) + pow(rho, k.alpha + k.alpha1));
    case KernelFamily::indicator:
      return Scalar(k.C);
  }
  return Scalar(0);
}

// d mu / d rho on (0, r); the jump at r is not included.
template <typename Scalar>
Scalar profile_slope(const KernelSpec& k, Scalar rho) {
  using std::pow;
  if (!(rho < k.r)) return Scalar(0);
  switch (k.family) {
    case KernelFamily::power_law_truncated:
      return k.C * (k.alpha - k.n) * pow(rho, k.alpha - k.n - 1);
    case KernelFamily::smooth_compact:
      return -2 * k.C * rho / (k.r * k.r);
    case KernelFamily::two_sided_decay: {
      const double s = k.alpha + k.alpha1;
      const Scalar p = pow(rho, s);
      return k.C * pow(rho, k.alpha - k.n - 1) * ((k.alpha - k.n) * (Scalar(1) + p) - s * p) /
             ((Scalar(1) + p) * (Scalar(1) + p));
    }
    case KernelFamily::indicator:
      return Scalar(0);
  }
  return Scalar(0);
}

template <typename Derived>
typename Derived::Scalar eval(const KernelSpec& k, const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  if (z.size() != k.n) throw ValidationError("z", "offset dimension does not match kernel dimension");
  const Scalar rho = z.norm();
  if (rho == Scalar(0)) {
    if (k.singular()) throw ValidationError("z", "evaluated at singularity");
    return k.family == KernelFamily::smooth_compact || k.family == KernelFamily::indicator ||
                   k.family == KernelFamily::two_sided_decay
               ? Scalar(k.C)
               : Scalar(0);
  }
  return profile(k, rho);
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime, 1> gradient(
    const KernelSpec& k, const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  if (k.family == KernelFamily::indicator)
    throw ValidationError("family", "kernel not differentiable");
  if (z.size() != k.n) throw ValidationError("z", "offset dimension does not match kernel dimension");
  const Scalar rho = z.norm();
  if (rho == Scalar(0)) throw ValidationError("z", "evaluated at singularity");
  return (profile_slope(k, rho) / rho) * z;
}

// Integral of J over R^n.
double l1_norm(const KernelSpec& k);

// Radius beyond which the remaining mass is at most tol; r itself for compact kernels.
double truncation_radius(const KernelSpec& k, double tol);

// K with |mu'(rho)| <= K rho^(alpha-n-1) on (0, r), and additionally
// |mu'(rho)| <= K rho^(-n-1-alpha1) for the two-sided family.
double decay_constant(const KernelSpec& k);

enum class ProfileKind { phi_eps, g_eps, lambda_eps, psi_eps };

class RadialProfile;

// Immutable radial profile derived from a kernel: the mollified phi_eps, the cutoff
// g_eps, their product Lambda_eps, or the potential psi_eps with div(x psi) = phi_eps.
class MollifiedProfile {
 public:
  struct Impl;

  ProfileKind kind() const;
  const KernelSpec& base() const;
  double epsilon() const;
  int dimension() const;

  double value(double t) const;
  double derivative(double t) const;
  // Profile vanishes for t beyond this (infinity if it never does).
  double support_end() const;
  // Integral over R^n of the phi_eps behind this profile (phi_eps, lambda_eps, psi_eps).
  double l1_norm() const;
  // phi_eps = a + b t^2 on [0, eps].
  double core_a() const;
  double core_b() const;

  const Impl& impl() const { return *impl_; }

 private:
  explicit MollifiedProfile(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;

  friend MollifiedProfile mollified_phi(const KernelSpec&, double);
  friend MollifiedProfile mollified_g(double, double);
  friend MollifiedProfile mollified_lambda(const KernelSpec&, double);
  friend MollifiedProfile psi_profile(const MollifiedProfile&, int);
};

MollifiedProfile mollified_phi(const KernelSpec& k, double eps);
MollifiedProfile mollified_g(double r, double eps);
// phi_eps * g_eps for a compact kernel.
MollifiedProfile mollified_lambda(const KernelSpec& k, double eps);
MollifiedProfile psi_profile(const MollifiedProfile& phi, int n);

}  // namespace nlc

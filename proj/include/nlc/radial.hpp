#pragma once

#include "nlc/kernels.hpp"

#include <memory>

namespace nlc {

// A radial kernel profile together with its radial antiderivatives, which is what the
// polar quadratures integrate along each ray:
//   mass(rho)   = ∫_0^rho mu(s) s^(n-1) ds
//   moment(rho) = ∫_0^rho mu'(s) s^(n-1) ds      (regular part; the jump at the support is separate)
// Both are clamped at reach(), the radius past which the kernel mass is ignored.
class RadialProfile {
 public:
  virtual ~RadialProfile() = default;

  int dimension() const { return n_; }
  double support() const { return support_; }
  double reach() const { return reach_; }
  // ∫_{R^n} mu, exact where a closed form exists.
  double total() const { return total_; }

  virtual double value(double rho) const = 0;
  virtual double slope(double rho) const = 0;
  virtual double mass(double rho) const = 0;
  virtual double moment(double rho) const = 0;
  virtual bool has_moment() const { return true; }
  // mu(support-) when mu drops to zero there, else 0.
  virtual double jump() const { return 0; }

 protected:
  int n_ = 2;
  double support_ = 1, reach_ = 1, total_ = 0;
};

using RadialPtr = std::shared_ptr<const RadialProfile>;

// Cached per distinct spec; safe to call from several threads.
RadialPtr radial_profile(const KernelSpec& k);
// For phi_eps and lambda_eps profiles.
RadialPtr radial_profile(const MollifiedProfile& p);

}  // namespace nlc

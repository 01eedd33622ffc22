#include "nlc/radial.hpp"

#include "nlc/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace nlc {

namespace {

class PowerLawRadial final : public RadialProfile {
 public:
  explicit PowerLawRadial(const KernelSpec& k) : k_(k) {
    n_ = k.n;
    support_ = reach_ = k.r;
    total_ = sphere_area(k.n) * k.C * std::pow(k.r, k.alpha) / k.alpha;
  }
  double value(double rho) const override { return profile(k_, rho); }
  double slope(double rho) const override { return profile_slope(k_, rho); }
  double mass(double rho) const override {
    const double q = std::min(rho, k_.r);
    return q > 0 ? k_.C * std::pow(q, k_.alpha) / k_.alpha : 0.0;
  }
  bool has_moment() const override { return k_.alpha > 1; }
  double moment(double rho) const override {
    if (!has_moment()) throw NumericalError("moment of mu' diverges for alpha <= 1; mollify the kernel");
    const double q = std::min(rho, k_.r);
    return q > 0 ? k_.C * (k_.alpha - k_.n) * std::pow(q, k_.alpha - 1) / (k_.alpha - 1) : 0.0;
  }
  double jump() const override { return k_.C * std::pow(k_.r, k_.alpha - k_.n); }

 private:
  KernelSpec k_;
};

class IndicatorRadial final : public RadialProfile {
 public:
  explicit IndicatorRadial(const KernelSpec& k) : k_(k) {
    n_ = k.n;
    support_ = reach_ = k.r;
    total_ = sphere_area(k.n) * k.C * std::pow(k.r, k.n) / k.n;
  }
  double value(double rho) const override { return profile(k_, rho); }
  double slope(double) const override { return 0; }
  double mass(double rho) const override {
    const double q = std::min(std::max(rho, 0.0), k_.r);
    return k_.C * std::pow(q, k_.n) / k_.n;
  }
  double moment(double) const override { return 0; }
  double jump() const override { return k_.C; }

 private:
  KernelSpec k_;
};

class SmoothRadial final : public RadialProfile {
 public:
  explicit SmoothRadial(const KernelSpec& k) : k_(k) {
    n_ = k.n;
    support_ = reach_ = k.r;
    total_ = sphere_area(k.n) * k.C * std::pow(k.r, k.n) * 2.0 / (k.n * (k.n + 2.0));
  }
  double value(double rho) const override { return profile(k_, rho); }
  double slope(double rho) const override { return profile_slope(k_, rho); }
  double mass(double rho) const override {
    const double q = std::min(std::max(rho, 0.0), k_.r);
    const int n = k_.n;
    return k_.C * (std::pow(q, n) / n - std::pow(q, n + 2) / ((n + 2) * k_.r * k_.r));
  }
  double moment(double rho) const override {
    const double q = std::min(std::max(rho, 0.0), k_.r);
    return -2 * k_.C * std::pow(q, k_.n + 1) / ((k_.n + 1) * k_.r * k_.r);
  }

 private:
  KernelSpec k_;
};

// Numeric antiderivatives with closed-form heads below `lo`.
class TwoSidedRadial final : public RadialProfile {
 public:
  explicit TwoSidedRadial(const KernelSpec& k) : k_(k) {
    n_ = k.n;
    support_ = k.r;
    const double w = sphere_area(k.n);
    const double s = k.alpha + k.alpha1;
    sigma_ = s;
    if (k.compact()) {
      reach_ = k.r;
    } else {
      const double exact = w * k.C * (kPi / s) / std::sin(kPi * k.alpha / s);
      reach_ = truncation_radius(k, 1e-14 * exact);
    }
    const double scale = k.compact() ? std::min(1.0, k.r) : 1.0;
    lo_ = 1e-6 * scale;
    auto nodes = geometric_nodes(lo_, reach_, 200, {1.0});
    const int n = k.n;
    mass_ = CumulativeTable([&](double t) { return profile(k_, t) * std::pow(t, n - 1); }, nodes, 20);
    if (has_moment())
      moment_ = CumulativeTable([&](double t) { return profile_slope(k_, t) * std::pow(t, n - 1); }, nodes, 20);
    if (k.compact()) {
      total_ = w * (head_mass(lo_) + mass_.total());
    } else {
      total_ = w * k.C * (kPi / s) / std::sin(kPi * k.alpha / s);
    }
  }
  double value(double rho) const override { return profile(k_, rho); }
  double slope(double rho) const override { return profile_slope(k_, rho); }
  double mass(double rho) const override {
    if (rho <= lo_) return rho > 0 ? head_mass(rho) : 0.0;
    return head_mass(lo_) + mass_.prefix(std::min(rho, reach_));
  }
  bool has_moment() const override { return k_.alpha > 1; }
  double moment(double rho) const override {
    if (!has_moment()) throw NumericalError("moment of mu' diverges for alpha <= 1; mollify the kernel");
    if (rho <= lo_) return rho > 0 ? head_moment(rho) : 0.0;
    return head_moment(lo_) + moment_.prefix(std::min(rho, reach_));
  }
  double jump() const override { return k_.compact() ? profile(k_, std::nextafter(k_.r, 0.0)) : 0.0; }

 private:
  double head_mass(double t) const {
    return k_.C * (std::pow(t, k_.alpha) / k_.alpha - std::pow(t, k_.alpha + sigma_) / (k_.alpha + sigma_));
  }
  double head_moment(double t) const {
    const double a = k_.alpha, n = k_.n;
    return k_.C * ((a - n) * std::pow(t, a - 1) / (a - 1) -
                   (a - n + sigma_) * std::pow(t, a - 1 + sigma_) / (a - 1 + sigma_));
  }

  KernelSpec k_;
  double sigma_ = 0, lo_ = 0;
  CumulativeTable mass_, moment_;
};

// phi_eps: quadratic core on [0, eps], base kernel beyond.
class PhiEpsRadial final : public RadialProfile {
 public:
  explicit PhiEpsRadial(const MollifiedProfile& p) : p_(p), base_(radial_profile(p.base())) {
    const KernelSpec& k = p.base();
    n_ = k.n;
    support_ = base_->support();
    reach_ = base_->reach();
    eps_ = p.epsilon();
    a_ = p.core_a();
    b_ = p.core_b();
    mass_eps_ = core_mass(eps_);
    moment_eps_ = core_moment(eps_);
    base_mass_eps_ = base_->mass(eps_);
    if (base_->has_moment()) {
      base_moment_eps_ = base_->moment(eps_);
    } else if (k.family == KernelFamily::two_sided_decay) {
      const int n = k.n;
      outer_moment_ = CumulativeTable([k, n](double t) { return profile_slope(k, t) * std::pow(t, n - 1); },
                                      geometric_nodes(eps_, reach_, 200, {1.0}), 20);
    }
    total_ = sphere_area(n_) * mass(reach_);
  }
  double value(double rho) const override { return p_.value(rho); }
  double slope(double rho) const override { return p_.derivative(rho); }
  double mass(double rho) const override {
    const double q = std::min(std::max(rho, 0.0), reach_);
    if (q <= eps_) return core_mass(q);
    return mass_eps_ + base_->mass(q) - base_mass_eps_;
  }
  double moment(double rho) const override {
    const double q = std::min(std::max(rho, 0.0), reach_);
    if (q <= eps_) return core_moment(q);
    const KernelSpec& k = p_.base();
    if (base_->has_moment()) return moment_eps_ + base_->moment(q) - base_moment_eps_;
    if (k.family == KernelFamily::power_law_truncated) {
      const double c = k.C * (k.alpha - k.n);
      if (k.alpha == 1) return moment_eps_ + c * std::log(q / eps_);
      return moment_eps_ + c * (std::pow(q, k.alpha - 1) - std::pow(eps_, k.alpha - 1)) / (k.alpha - 1);
    }
    return moment_eps_ + outer_moment_.prefix(q);
  }
  double jump() const override { return base_->jump(); }

 private:
  double core_mass(double q) const {
    return a_ * std::pow(q, n_) / n_ + b_ * std::pow(q, n_ + 2) / (n_ + 2);
  }
  double core_moment(double q) const { return 2 * b_ * std::pow(q, n_ + 1) / (n_ + 1); }

  MollifiedProfile p_;
  RadialPtr base_;
  double eps_ = 0, a_ = 0, b_ = 0;
  double mass_eps_ = 0, moment_eps_ = 0, base_mass_eps_ = 0, base_moment_eps_ = 0;
  CumulativeTable outer_moment_;
};

// Lambda_eps = phi_eps g_eps: smooth, compactly supported in [0, r(1 + eps/2)].
class LambdaEpsRadial final : public RadialProfile {
 public:
  explicit LambdaEpsRadial(const MollifiedProfile& p) : p_(p) {
    const KernelSpec& k = p.base();
    n_ = k.n;
    eps_ = p.epsilon();
    support_ = reach_ = p.support_end();
    a_ = p.core_a();
    b_ = p.core_b();
    const double inner = k.r * (1 - 0.5 * eps_);
    const int n = n_;
    auto nodes = geometric_nodes(eps_, reach_, 400, {inner, k.r});
    mass_ = CumulativeTable([this, n](double t) { return p_.value(t) * std::pow(t, n - 1); }, nodes, 20);
    moment_ = CumulativeTable([this, n](double t) { return p_.derivative(t) * std::pow(t, n - 1); }, nodes, 20);
    total_ = sphere_area(n_) * mass(reach_);
  }
  double value(double rho) const override { return p_.value(rho); }
  double slope(double rho) const override { return p_.derivative(rho); }
  double mass(double rho) const override {
    const double q = std::min(std::max(rho, 0.0), reach_);
    if (q <= eps_) return a_ * std::pow(q, n_) / n_ + b_ * std::pow(q, n_ + 2) / (n_ + 2);
    return mass(eps_) + mass_.prefix(q);
  }
  double moment(double rho) const override {
    const double q = std::min(std::max(rho, 0.0), reach_);
    if (q <= eps_) return 2 * b_ * std::pow(q, n_ + 1) / (n_ + 1);
    return moment(eps_) + moment_.prefix(q);
  }

 private:
  MollifiedProfile p_;
  double eps_ = 0, a_ = 0, b_ = 0;
  CumulativeTable mass_, moment_;
};

using Key = std::tuple<int, int, double, double, double, double>;

}  // namespace

RadialPtr radial_profile(const KernelSpec& k) {
  validate(k);
  static std::mutex mutex;
  static std::map<Key, RadialPtr> cache;
  const Key key{static_cast<int>(k.family), k.n, k.r, k.alpha, k.alpha1, k.C};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  RadialPtr p;
  switch (k.family) {
    case KernelFamily::power_law_truncated: p = std::make_shared<PowerLawRadial>(k); break;
    case KernelFamily::smooth_compact: p = std::make_shared<SmoothRadial>(k); break;
    case KernelFamily::two_sided_decay: p = std::make_shared<TwoSidedRadial>(k); break;
    case KernelFamily::indicator: p = std::make_shared<IndicatorRadial>(k); break;
  }
  std::lock_guard lock(mutex);
  return cache.emplace(key, p).first->second;
}

RadialPtr radial_profile(const MollifiedProfile& p) {
  switch (p.kind()) {
    case ProfileKind::phi_eps: return std::make_shared<PhiEpsRadial>(p);
    case ProfileKind::lambda_eps: return std::make_shared<LambdaEpsRadial>(p);
    default: throw ValidationError("kind", "only phi_eps and lambda_eps profiles act as kernels");
  }
}

}  // namespace nlc

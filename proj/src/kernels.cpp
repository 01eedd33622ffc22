#include "nlc/kernels.hpp"

#include "nlc/quadrature.hpp"
#include "nlc/radial.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

namespace nlc {

std::string to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::power_law_truncated: return "power_law_truncated";
    case KernelFamily::smooth_compact: return "smooth_compact";
    case KernelFamily::two_sided_decay: return "two_sided_decay";
    case KernelFamily::indicator: return "indicator";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(const std::string& s) {
  for (auto f : {KernelFamily::power_law_truncated, KernelFamily::smooth_compact,
                 KernelFamily::two_sided_decay, KernelFamily::indicator})
    if (to_string(f) == s) return f;
  throw ValidationError("family", "unknown kernel family '" + s + "'");
}

void validate(const KernelSpec& k) {
  if (k.n < 2) throw ValidationError("n", "dimension must be an integer >= 2");
  if (!(k.C > 0) || !std::isfinite(k.C)) throw ValidationError("C", "amplitude must be positive");
  if (std::isnan(k.r) || !(k.r > 0)) throw ValidationError("r", "support radius must be positive");
  if (!k.compact() && k.family != KernelFamily::two_sided_decay)
    throw ValidationError("r", "infinite support is only allowed for two_sided_decay");
  switch (k.family) {
    case KernelFamily::power_law_truncated:
      if (!(k.alpha > 0)) throw ValidationError("alpha", "alpha must be > 0 (kernel not integrable)");
      if (!(k.alpha < k.n))
        throw ValidationError("alpha", "power_law_truncated needs alpha < n to be strictly decreasing");
      break;
    case KernelFamily::two_sided_decay:
      if (!(k.alpha > 0)) throw ValidationError("alpha", "alpha must be > 0 (kernel not integrable)");
      if (!(k.alpha1 > 0)) throw ValidationError("alpha1", "alpha1 must be > 0 (kernel not integrable)");
      if (k.alpha > k.n) throw ValidationError("alpha", "two_sided_decay needs alpha <= n to be decreasing");
      break;
    case KernelFamily::smooth_compact:
    case KernelFamily::indicator:
      break;
  }
}

std::vector<std::string> kernel_warnings(const KernelSpec& k, double holder_beta) {
  std::vector<std::string> w;
  if (k.singular() && !(holder_beta + k.alpha > 1))
    w.push_back("beta + alpha <= 1: the boundary regularity does not compensate the kernel singularity");
  return w;
}

double sphere_area(int n) { return 2 * std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n); }
double ball_volume(int n) { return sphere_area(n) / n; }

double l1_norm(const KernelSpec& k) {
  validate(k);
  const double w = sphere_area(k.n);
  switch (k.family) {
    case KernelFamily::power_law_truncated:
      return w * k.C * std::pow(k.r, k.alpha) / k.alpha;
    case KernelFamily::smooth_compact:
      return w * k.C * std::pow(k.r, k.n) * 2.0 / (k.n * (k.n + 2.0));
    case KernelFamily::indicator:
      return w * k.C * std::pow(k.r, k.n) / k.n;
    case KernelFamily::two_sided_decay:
      if (!k.compact()) {
        const double s = k.alpha + k.alpha1;
        return w * k.C * (kPi / s) / std::sin(kPi * k.alpha / s);
      }
      return radial_profile(k)->total();
  }
  return 0;
}

double truncation_radius(const KernelSpec& k, double tol) {
  if (!(tol > 0)) throw ValidationError("tol", "tolerance must be positive");
  validate(k);
  if (k.family != KernelFamily::two_sided_decay) return k.r;
  // Tail mass beyond rho is at most C w rho^-alpha1 / alpha1.
  const double rho = std::pow(k.C * sphere_area(k.n) / (k.alpha1 * tol), 1.0 / k.alpha1);
  return std::min(rho, k.r);
}

double decay_constant(const KernelSpec& k) {
  validate(k);
  switch (k.family) {
    case KernelFamily::power_law_truncated:
      return k.C * std::max(1.0, k.n - k.alpha);
    case KernelFamily::smooth_compact:
      return 2 * k.C;
    case KernelFamily::two_sided_decay:
      return k.C * (k.n + k.alpha1);
    case KernelFamily::indicator:
      throw ValidationError("family", "kernel not differentiable");
  }
  return 0;
}

// ---------------------------------------------------------------------------

namespace {

// exp(-1/(1-u^2)) on (-1, 1).
double bump(double u) {
  const double d = 1 - u * u;
  return d > 0 ? std::exp(-1 / d) : 0.0;
}

// Kernel with the jump at r removed. The smooth family already vanishes continuously there
// and its formula depends on r, so it is left alone.
KernelSpec continued(const KernelSpec& k) {
  if (k.family == KernelFamily::smooth_compact) return k;
  KernelSpec open = k;
  open.r = std::numeric_limits<double>::infinity();
  return open;
}

struct BumpTable {
  CumulativeTable table;
  double norm;
};

const BumpTable& bump_table() {
  static const BumpTable t = [] {
    CumulativeTable c(bump, uniform_nodes(-1, 1, 4097), 20);
    return BumpTable{c, c.total()};
  }();
  return t;
}

}  // namespace

struct MollifiedProfile::Impl {
  ProfileKind kind;
  KernelSpec base;
  double eps = 0;
  int n = 2;
  double a = 0, b = 0;       // phi core coefficients
  double g_r = 0;            // g_eps layer centre
  double end = 0;            // support end
  double l1 = 0;
  std::shared_ptr<const Impl> phi;  // psi and lambda hold their phi
  // psi: I(t) = ∫_t^end phi_eps tau^(n-1) dtau
  CumulativeTable tail_table;
  double tail_beyond = 0;    // mass past the table end (infinite support)
  RadialPtr phi_radial;

  double phi_value(double t) const {
    if (t > eps) return profile(base, t);
    return a + b * t * t;
  }
  double phi_slope(double t) const {
    if (t > eps) return profile_slope(base, t);
    return 2 * b * t;
  }
  double g_value(double t) const {
    const double w = 0.5 * g_r * eps;
    if (t <= g_r - w) return 1;
    if (t >= g_r + w) return 0;
    const auto& bt = bump_table();
    return 1 - bt.table.prefix((t - g_r) / w) / bt.norm;
  }
  double g_slope(double t) const {
    const double w = 0.5 * g_r * eps;
    if (t <= g_r - w || t >= g_r + w) return 0;
    return -bump((t - g_r) / w) / (bump_table().norm * w);
  }
  // Lambda uses the profile continued past r; g_eps supplies the cutoff.
  double ext_value(double t) const {
    const KernelSpec open = continued(base);
    if (base.family == KernelFamily::indicator) return base.C;
    if (t > eps) return profile(open, t);
    return a + b * t * t;
  }
  double ext_slope(double t) const {
    const KernelSpec open = continued(base);
    if (base.family == KernelFamily::indicator) return 0;
    if (t > eps) return profile_slope(open, t);
    return 2 * b * t;
  }
  double psi_tail(double t) const {
    const double lo = tail_table.lo();
    if (t >= end) return 0;
    if (t >= lo) return tail_table.tail(t) + tail_beyond;
    return tail_table.total() + tail_beyond + phi_radial->mass(lo) - phi_radial->mass(t);
  }
};

ProfileKind MollifiedProfile::kind() const { return impl_->kind; }
const KernelSpec& MollifiedProfile::base() const { return impl_->base; }
double MollifiedProfile::epsilon() const { return impl_->eps; }
int MollifiedProfile::dimension() const { return impl_->n; }
double MollifiedProfile::support_end() const { return impl_->end; }
double MollifiedProfile::l1_norm() const { return impl_->l1; }
double MollifiedProfile::core_a() const { return impl_->a; }
double MollifiedProfile::core_b() const { return impl_->b; }

double MollifiedProfile::value(double t) const {
  const Impl& m = *impl_;
  switch (m.kind) {
    case ProfileKind::phi_eps: return m.phi_value(t);
    case ProfileKind::g_eps: return m.g_value(t);
    case ProfileKind::lambda_eps: return m.ext_value(t) * m.g_value(t);
    case ProfileKind::psi_eps: {
      if (t >= m.end) return 0;
      if (t <= 0) return -std::numeric_limits<double>::infinity();
      return -m.psi_tail(t) / std::pow(t, m.n);
    }
  }
  return 0;
}

double MollifiedProfile::derivative(double t) const {
  const Impl& m = *impl_;
  switch (m.kind) {
    case ProfileKind::phi_eps: return m.phi_slope(t);
    case ProfileKind::g_eps: return m.g_slope(t);
    case ProfileKind::lambda_eps:
      return m.ext_slope(t) * m.g_value(t) + m.ext_value(t) * m.g_slope(t);
    case ProfileKind::psi_eps: {
      if (t >= m.end || t <= 0) return 0;
      // From n psi + t psi' = phi.
      return (m.phi->phi_value(t) - m.n * value(t)) / t;
    }
  }
  return 0;
}

MollifiedProfile mollified_phi(const KernelSpec& k, double eps) {
  validate(k);
  if (k.family == KernelFamily::indicator)
    throw ValidationError("family", "indicator kernel has no decreasing profile to mollify; use mollified_g");
  if (!(eps > 0)) throw ValidationError("epsilon", "epsilon must be positive");
  if (k.compact() && !(eps < k.r)) throw ValidationError("epsilon", "epsilon must be below the support radius");
  auto m = std::make_shared<MollifiedProfile::Impl>();
  m->kind = ProfileKind::phi_eps;
  m->base = k;
  m->eps = eps;
  m->n = k.n;
  // C^1 quadratic a + b t^2 matching phi and phi' at eps; phi' <= 0 gives b <= 0, so it is
  // monotone and no larger than phi(eps) - phi'(eps) eps / 2.
  const double f = profile(k, eps), df = profile_slope(k, eps);
  m->b = df / (2 * eps);
  m->a = f - 0.5 * df * eps;
  m->end = k.r;
  m->l1 = 0;
  MollifiedProfile p(m);
  m->l1 = radial_profile(p)->total();
  return p;
}

MollifiedProfile mollified_g(double r, double eps) {
  if (!(r > 0) || !std::isfinite(r)) throw ValidationError("r", "cutoff radius must be positive and finite");
  if (!(eps > 0)) throw ValidationError("epsilon", "epsilon must be positive");
  if (!(eps < 0.5)) throw ValidationError("epsilon", "transition layer overlaps the origin (need epsilon < 1/2)");
  auto m = std::make_shared<MollifiedProfile::Impl>();
  m->kind = ProfileKind::g_eps;
  m->base = KernelSpec{KernelFamily::indicator, 2, r, 1, 1, 1};
  m->eps = eps;
  m->g_r = r;
  m->end = r * (1 + 0.5 * eps);
  return MollifiedProfile(m);
}

MollifiedProfile mollified_lambda(const KernelSpec& k, double eps) {
  validate(k);
  if (!k.compact()) throw ValidationError("r", "lambda_eps needs a compactly supported kernel");
  if (!(eps > 0) || !(eps < 0.5) || !(eps < 0.5 * k.r))
    throw ValidationError("epsilon", "need 0 < epsilon < min(1/2, r/2)");
  auto m = std::make_shared<MollifiedProfile::Impl>();
  m->kind = ProfileKind::lambda_eps;
  m->base = k;
  m->eps = eps;
  m->n = k.n;
  m->g_r = k.r;
  if (k.family != KernelFamily::indicator) {
    const KernelSpec open = continued(k);
    const double f = profile(open, eps), df = profile_slope(open, eps);
    m->b = df / (2 * eps);
    m->a = f - 0.5 * df * eps;
  } else {
    m->a = k.C;
  }
  m->end = k.r * (1 + 0.5 * eps);
  MollifiedProfile p(m);
  m->l1 = radial_profile(p)->total();
  return p;
}

MollifiedProfile psi_profile(const MollifiedProfile& phi, int n) {
  if (phi.kind() != ProfileKind::phi_eps) throw ValidationError("phi_eps", "psi needs a phi_eps profile");
  if (n != phi.dimension()) throw ValidationError("n", "dimension does not match the kernel");
  const KernelSpec& k = phi.base();
  if (!k.compact() && k.family != KernelFamily::two_sided_decay)
    throw ValidationError("phi_eps", "divergent integral: tail is not integrable");
  auto m = std::make_shared<MollifiedProfile::Impl>();
  m->kind = ProfileKind::psi_eps;
  m->base = k;
  m->eps = phi.epsilon();
  m->n = n;
  m->phi = phi.impl_;
  m->phi_radial = radial_profile(phi);
  m->l1 = phi.l1_norm();
  const double scale = k.compact() ? k.r : 1.0;
  const double end = k.compact() ? k.r : truncation_radius(k, 1e-14 * phi.l1_norm());
  m->end = k.compact() ? k.r : std::numeric_limits<double>::infinity();
  const double lo = 1e-4 * scale;
  const int per_decade = static_cast<int>(std::ceil(2047 / std::log10(end / lo)));
  auto f = [&](double t) { return m->phi->phi_value(t) * std::pow(t, n - 1); };
  m->tail_table = CumulativeTable(f, geometric_nodes(lo, end, per_decade, {m->eps, scale}), 20);
  if (!k.compact()) {
    // ∫_end^∞ C t^(-1-alpha1) / (1 + t^-(alpha+alpha1)) dt, leading two terms.
    const double s = k.alpha + k.alpha1;
    m->tail_beyond = k.C * (std::pow(end, -k.alpha1) / k.alpha1 - std::pow(end, -k.alpha1 - s) / (k.alpha1 + s));
  }
  return MollifiedProfile(m);
}

}  // namespace nlc

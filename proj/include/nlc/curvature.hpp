#pragma once

#include "nlc/convolution.hpp"
#include "nlc/geometry.hpp"
#include "nlc/kernels.hpp"
#include "nlc/radial.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace nlc {

// H(x) = ∫ J(x - y) (chi_{Omega^c}(y) - chi_Omega(y)) dy throughout: convex sets have
// positive boundary curvature.
inline constexpr const char* kSignConvention = "complement-minus-set";

struct QuadratureOptions {
  double tol = -1;  // absolute; < 0 means 1e-6 ||J||_1
  int min_angles = 256;
  int max_angles = 1 << 17;
};

struct QuadratureResult {
  double value = 0;
  int angles = 0;
  bool converged = false;
};

// Periodic trapezoid rule on nested angle sets theta_k = theta0 + 2 pi k / N, doubling N until
// successive estimates agree to `tol`.
template <class G>
QuadratureResult angular_integral(G&& g, double tol, int min_angles, int max_angles) {
  const double theta0 = 2 * kPi * 0.381966 / 256;
  int n = min_angles;
  double sum = 0;
  for (int k = 0; k < n; ++k) sum += g(theta0 + 2 * kPi * k / n);
  double est = sum * 2 * kPi / n;
  // Two quiet doublings in a row: a single one can be a coincidence of the coarse rules.
  int quiet = 0;
  while (n < max_angles) {
    for (int k = 0; k < n; ++k) sum += g(theta0 + 2 * kPi * (k + 0.5) / n);
    n *= 2;
    const double next = sum * 2 * kPi / n;
    quiet = std::abs(next - est) < tol ? quiet + 1 : 0;
    est = next;
    if (quiet == 2) return {est, n, true};
  }
  return {est, n, false};
}

// ∫_Omega mu(|x - y|) dy in polar coordinates about x: along each ray the exact radial
// antiderivative is differenced across the pieces of the ray inside the region.
template <Region R>
QuadratureResult kernel_mass(const R& region, const RadialProfile& p, const Vec2& x,
                             const QuadratureOptions& opt = {}) {
  if (p.dimension() != 2) throw ValidationError("n", "planar quadrature needs a 2-D kernel");
  const double tol = opt.tol < 0 ? 1e-6 * p.total() : opt.tol;
  std::vector<double> scratch;
  std::vector<Interval> pieces;
  auto ray = [&](double th) {
    const Vec2 d(std::cos(th), std::sin(th));
    ray_intervals(region, x, d, p.reach(), scratch, pieces);
    double m = 0;
    for (const auto& [a, b] : pieces) m += p.mass(b) - p.mass(a);
    return m;
  };
  // The mass is a quarter of the curvature tolerance's scale (H = ||J|| - 2 mass).
  return angular_integral(ray, 0.5 * tol, opt.min_angles, opt.max_angles);
}

template <Region R>
double curvature_at(const R& region, const RadialProfile& p, const Vec2& x, const QuadratureOptions& opt = {}) {
  return p.total() - 2 * kernel_mass(region, p, x, opt).value;
}

double curvature_at(const Shape& s, const KernelSpec& k, const Vec2& x, const QuadratureOptions& opt = {});

struct CurvatureField {
  Grid grid;
  Eigen::ArrayXXd values;
  KernelSpec kernel;
  std::string sign_convention = kSignConvention;
};

struct FieldOptions {
  // Refuse masks whose set bits come closer to the grid edge than the kernel support.
  bool check_padding = true;
};

// H = ||J||_1 - 2 (J_h * chi) with exact cell-integrated kernel weights.
CurvatureField curvature_field(const Mask& m, const KernelSpec& k, const FieldOptions& opt = {});
CurvatureField curvature_field(const Mask& m, const RadialProfile& p, const FieldOptions& opt = {});

// Boundary-integral form for the mollified kernel phi_eps behind `psi`:
// H_eps(x) = ||phi_eps||_1 (1 - 2 chi(x)) + 2 ∫ psi(|x-y|) (x-y).nu_y dsigma, with chi = 1/2 on the trace.
double curvature_boundary_integral(const BoundaryTrace& trace, const MollifiedProfile& psi, const Vec2& x);
double curvature_boundary_integral(const std::vector<BoundaryTrace>& traces, const MollifiedProfile& psi,
                                   const Vec2& x);

struct SphereLayer {
  double one_sided = 0;  // ∫_{Omega ∩ dB} (e.e_y) dsigma
  double two_sided = 0;  // ∫_{Omega^c ∩ dB} (e.e_y) - ∫_{Omega ∩ dB} (e.e_y)
};

// e_y = (x - y)/|x - y|. Arcs come from a sign scan on `angles` points refined by bisection,
// integrated in closed form.
template <Region R>
SphereLayer sphere_layer(const R& region, const Vec2& x, const Vec2& e, double lambda, int angles = 4096);
SphereLayer sphere_layer(const Shape& s, const Vec2& x, const Vec2& e, double lambda, int angles = 4096);

// Lipschitz constant of lambda -> F (one-sided) for a boundary that is a graph with slope bound M.
double sphere_layer_lipschitz(double M);

struct DerivativeOptions {
  double delta = -1;  // graph-gate margin; < 0 means 0.1 r
  QuadratureOptions quadrature;
};

// d_e H at a boundary point: volumetric term with phi'_eps plus, for kernels that jump at r,
// the sphere term -mu(r-) F_two(x, e, r). Kernels with a jump need the boundary to be a graph
// of slope < 1 in B_{r+delta}(x); otherwise HypothesisViolation.
double tangential_derivative(const Shape& s, const KernelSpec& k, const Vec2& x, const Vec2& e, double eps,
                             const DerivativeOptions& opt = {});

struct DerivativeParts {
  double volumetric = 0;
  double surface = 0;
  double slope = 0;  // measured graph slope (jump kernels)
};
DerivativeParts tangential_derivative_parts(const Shape& s, const KernelSpec& k, const Vec2& x, const Vec2& e,
                                            double eps, const DerivativeOptions& opt = {});

// |B_r| - 2 |Omega ∩ B_r(x)|: lens areas for balls, node counting at spacing h otherwise
// (h <= 0 means r / 256).
double constant_kernel_curvature(const Shape& s, double r, const Vec2& x, double h = 0);

double ball_curvature(const KernelSpec& k, double R, const QuadratureOptions& opt = {});

struct RadiusBracket {
  double lo = -1, hi = -1;  // < 0: 0.1 and 10 times the kernel length scale
  int samples = 20;
};
double radius_for_curvature(const KernelSpec& k, double c, const RadiusBracket& b = {});

// Curvature (and optionally d/ds along the trace) at the boundary samples of a shape.
struct BoundaryCurvature {
  std::vector<BoundarySample> samples;
  std::vector<int> component;
  std::vector<double> H;
  std::vector<double> dH;  // NaN where not computed or refused by the graph gate
  double l1 = 0;
};

struct BoundaryCurvatureOptions {
  bool derivative = false;
  double eps = -1;  // mollification for the derivative; < 0 means 1e-4 r
  QuadratureOptions quadrature;
  DerivativeOptions derivative_options;
  SampleOptions sampling;
};

BoundaryCurvature boundary_curvature(const Shape& s, const KernelSpec& k, int count,
                                     const BoundaryCurvatureOptions& opt = {});

// 3-D: disjoint union of balls, kernel with n = 3.
struct Ball3 {
  Vec3 center;
  double R;
};
double curvature_at_3d(const std::vector<Ball3>& balls, const KernelSpec& k, const Vec3& x);

// ---------------------------------------------------------------------------

template <Region R>
SphereLayer sphere_layer(const R& region, const Vec2& x, const Vec2& e, double lambda, int angles) {
  if (!(lambda > 0)) throw ValidationError("lambda", "sphere radius must be positive");
  auto in = [&](double th) { return region.inside(x + lambda * Vec2(std::cos(th), std::sin(th))); };
  const double step = 2 * kPi / angles;
  const double th0 = 0.5 * step * 0.618034;
  // Arc boundaries.
  std::vector<double> cuts;
  bool prev = in(th0);
  const bool first = prev;
  for (int k = 1; k <= angles; ++k) {
    const double th = th0 + k * step;
    const bool cur = in(th);
    if (cur != prev) {
      double a = th - step, b = th;
      for (int it = 0; it < 60; ++it) {
        const double m = 0.5 * (a + b);
        (in(m) == prev ? a : b) = m;
      }
      cuts.push_back(0.5 * (a + b));
    }
    prev = cur;
  }
  // ∫ cos(theta - phi_e) over the inside arcs.
  auto prim = [&](double th) { return e.x() * std::sin(th) - e.y() * std::cos(th); };
  double inside_integral = 0;
  if (cuts.empty()) {
    inside_integral = 0;  // full circle in or out: ∫ e.omega = 0 either way
  } else {
    bool state = first;
    double start = th0;
    for (double c : cuts) {
      if (state) inside_integral += prim(c) - prim(start);
      state = !state;
      start = c;
    }
    if (state) inside_integral += prim(th0 + 2 * kPi) - prim(start);
  }
  SphereLayer out;
  out.one_sided = -lambda * inside_integral;
  out.two_sided = 2 * lambda * inside_integral;
  return out;
}

}  // namespace nlc

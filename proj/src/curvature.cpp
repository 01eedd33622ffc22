#include "nlc/curvature.hpp"

#include "nlc/parallel.hpp"
#include "nlc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nlc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_planar(const KernelSpec& k) {
  validate(k);
  if (k.n != 2) throw ValidationError("n", "planar routine needs n = 2");
}

}  // namespace

double curvature_at(const Shape& s, const KernelSpec& k, const Vec2& x, const QuadratureOptions& opt) {
  require_planar(k);
  return curvature_at(s, *radial_profile(k), x, opt);
}

CurvatureField curvature_field(const Mask& m, const KernelSpec& k, const FieldOptions& opt) {
  require_planar(k);
  CurvatureField f = curvature_field(m, *radial_profile(k), opt);
  f.kernel = k;
  return f;
}

CurvatureField curvature_field(const Mask& m, const RadialProfile& p, const FieldOptions& opt) {
  const Grid& g = m.grid;
  if (g.nx < 1 || g.ny < 1) throw ValidationError("grid", "empty grid");
  if (opt.check_padding && std::isfinite(p.support())) {
    const int need = static_cast<int>(std::ceil(p.reach() / g.h - 1e-9));
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        if (m.bits(i, j) && std::min({i, j, g.nx - 1 - i, g.ny - 1 - j}) < need)
          throw ValidationError("padding", "insufficient padding: wrap-around hazard");
  }
  const double diag = g.h * std::hypot(g.nx, g.ny);
  const int K = static_cast<int>(std::ceil(std::min(p.reach(), diag) / g.h)) + 1;
  Convolver conv(kernel_stencil(p, g.h, K));
  const Eigen::ArrayXXd chi = m.bits.cast<double>();
  CurvatureField out;
  out.grid = g;
  out.values = p.total() - 2 * conv.apply(chi, Extension::zero);
  return out;
}

// ---------------------------------------------------------------------------

double curvature_boundary_integral(const BoundaryTrace& trace, const MollifiedProfile& psi, const Vec2& x) {
  return curvature_boundary_integral(std::vector<BoundaryTrace>{trace}, psi, x);
}

double curvature_boundary_integral(const std::vector<BoundaryTrace>& traces, const MollifiedProfile& psi,
                                   const Vec2& x) {
  if (psi.kind() != ProfileKind::psi_eps) throw ValidationError("psi", "expected a psi profile");
  if (psi.dimension() != 2) throw ValidationError("n", "planar routine needs n = 2");
  double total_length = 0;
  for (const auto& t : traces) {
    if (!t.closed) throw ValidationError("trace", "boundary integral needs closed traces");
    if (t.samples.size() < 3) throw ValidationError("trace", "too few samples");
    total_length += t.length;
  }
  const double touch = 1e-9 * std::max(total_length, 1.0);

  // Winding number of the sampled polygon, or 1/2 on the trace itself.
  bool on_trace = false;
  double winding = 0;
  for (const auto& t : traces) {
    const auto& q = t.samples;
    for (std::size_t k = 0; k < q.size(); ++k) {
      const Vec2 a = q[k].x - x, b = q[(k + 1) % q.size()].x - x;
      const Vec2 ab = b - a;
      const double l2 = ab.squaredNorm();
      const double u = l2 > 0 ? std::clamp(-a.dot(ab) / l2, 0.0, 1.0) : 0.0;
      // the chord cuts inside the curve by about its sagitta; points in that sliver are on the curve
      const double sag = std::sqrt(l2) * (q[k].normal - q[(k + 1) % q.size()].normal).norm() / 8;
      if ((a + u * ab).norm() <= std::max(touch, 2 * sag)) on_trace = true;
      winding += std::atan2(cross(a, b), a.dot(b));
    }
  }
  const double chi = on_trace ? 0.5 : (std::abs(winding) > kPi ? 1.0 : 0.0);

  double sum = 0;
  for (const auto& t : traces) {
    const auto& q = t.samples;
    const std::size_t N = q.size();
    const double ds = t.length / N;
    std::vector<double> val(N, 0.0);
    std::vector<char> hit(N, 0);
    for (std::size_t k = 0; k < N; ++k) {
      const Vec2 d = x - q[k].x;
      const double r = d.norm();
      if (r <= touch) {
        hit[k] = 1;
        continue;
      }
      val[k] = psi.value(r) * d.dot(q[k].normal);
    }
    for (std::size_t k = 0; k < N; ++k)
      if (hit[k]) val[k] = 0.5 * (val[(k + N - 1) % N] + val[(k + 1) % N]);
    for (double v : val) sum += v * ds;
  }
  return psi.l1_norm() * (1 - 2 * chi) + 2 * sum;
}

// ---------------------------------------------------------------------------

SphereLayer sphere_layer(const Shape& s, const Vec2& x, const Vec2& e, double lambda, int angles) {
  return sphere_layer<Shape>(s, x, e, lambda, angles);
}

double sphere_layer_lipschitz(double M) {
  if (!(M >= 0 && M < 1)) throw ValidationError("slope", "graph slope bound must lie in [0, 1)");
  return 2 * std::sqrt(1 + M * M) / (1 - M * M);
}

DerivativeParts tangential_derivative_parts(const Shape& s, const KernelSpec& k, const Vec2& x, const Vec2& e,
                                            double eps, const DerivativeOptions& opt) {
  require_planar(k);
  if (std::abs(e.norm() - 1) > 1e-9) throw ValidationError("e", "direction must be a unit vector");
  const Vec2 nu = s.normal(x);
  if (std::abs(e.dot(nu)) > 1e-6) throw ValidationError("e", "direction is not tangent to the boundary");
  if (k.family == KernelFamily::two_sided_decay && !k.compact() && k.alpha <= 1)
    throw ValidationError("alpha", "tangential derivative needs alpha > 1 or a mollified kernel with compact support");

  DerivativeParts out;
  const RadialPtr base = radial_profile(k);
  if (k.has_jump()) {
    const double delta = opt.delta < 0 ? 0.1 * k.r : opt.delta;
    const GraphSlope g = local_graph_slope(s, x, k.r + delta);
    if (!g.is_graph || !(g.slope < 1))
      throw HypothesisViolation("boundary is not a graph of slope < 1 near x: " +
                                (g.reason.empty() ? std::string("slope too large") : g.reason));
    out.slope = g.slope;
  }

  RadialPtr p = base;
  if (k.singular()) p = radial_profile(mollified_phi(k, eps));
  if (p->has_moment()) {
    const double scale = p->total() / std::min(p->reach(), k.compact() ? k.r : 1.0);
    const double tol = opt.quadrature.tol < 0 ? 1e-7 * scale : opt.quadrature.tol;
    std::vector<double> scratch;
    std::vector<Interval> pieces;
    auto ray = [&](double th) {
      const Vec2 w(std::cos(th), std::sin(th));
      ray_intervals(s, x, w, p->reach(), scratch, pieces);
      double m = 0;
      for (const auto& [a, b] : pieces) m += p->moment(b) - p->moment(a);
      return w.dot(e) * m;
    };
    const auto q = angular_integral(ray, 0.5 * tol, opt.quadrature.min_angles, opt.quadrature.max_angles);
    out.volumetric = 2 * q.value;
  } else {
    throw NumericalError("radial moment unavailable for this kernel");
  }
  if (k.family == KernelFamily::indicator && std::abs(out.volumetric) > 1e-12 * base->total())
    throw NumericalError("indicator kernel produced a nonzero volumetric derivative");

  if (k.has_jump()) out.surface = -base->jump() * sphere_layer(s, x, e, k.r).two_sided;
  return out;
}

double tangential_derivative(const Shape& s, const KernelSpec& k, const Vec2& x, const Vec2& e, double eps,
                             const DerivativeOptions& opt) {
  const DerivativeParts p = tangential_derivative_parts(s, k, x, e, eps, opt);
  return p.volumetric + p.surface;
}

// ---------------------------------------------------------------------------

double constant_kernel_curvature(const Shape& s, double r, const Vec2& x, double h) {
  if (!(r > 0) || !std::isfinite(r)) throw ValidationError("r", "radius must be positive and finite");
  const double disk = kPi * r * r;
  if (const auto* b = s.as<Ball>()) return disk - 2 * lens_area(b->R, r, (x - b->center).norm());
  if (const auto* u = s.as<BallUnion>()) {
    const Eigen::MatrixXd g = gaps(*u);
    bool disjoint = true;
    for (int i = 0; i < g.rows(); ++i)
      for (int j = i + 1; j < g.cols(); ++j) disjoint = disjoint && g(i, j) >= 0;
    if (disjoint) {
      double a = 0;
      for (const auto& b : u->balls) a += lens_area(b.R, r, (x - b.center).norm());
      return disk - 2 * a;
    }
  }
  if (h <= 0) h = r / 256;
  const int K = static_cast<int>(std::floor(r / h));
  long in_ball = 0, in_set = 0;
  for (int j = -K; j <= K; ++j)
    for (int i = -K; i <= K; ++i) {
      if (double(i) * i + double(j) * j >= (r / h) * (r / h)) continue;
      ++in_ball;
      if (s.inside(x + h * Vec2(i, j))) ++in_set;
    }
  return disk * (1 - 2 * double(in_set) / double(in_ball));
}

double ball_curvature(const KernelSpec& k, double R, const QuadratureOptions& opt) {
  if (!(R > 0)) throw ValidationError("R", "radius must be positive");
  return curvature_at(Shape(Ball{{0, 0}, R}), k, Vec2(R, 0), opt);
}

double radius_for_curvature(const KernelSpec& k, double c, const RadiusBracket& b) {
  require_planar(k);
  const double L = k.compact() ? k.r : 1.0;
  const double lo = b.lo < 0 ? 0.1 * L : b.lo, hi = b.hi < 0 ? 10 * L : b.hi;
  if (!(lo > 0 && hi > lo)) throw ValidationError("bracket", "need 0 < lo < hi");
  if (b.samples < 2) throw ValidationError("samples", "need at least two samples");
  QuadratureOptions q;
  q.tol = 1e-10 * l1_norm(k);
  q.min_angles = 512;
  std::vector<double> R(b.samples), H(b.samples);
  for (int i = 0; i < b.samples; ++i) {
    R[i] = lo * std::pow(hi / lo, double(i) / (b.samples - 1));
    H[i] = ball_curvature(k, R[i], q);
  }
  for (int i = 1; i < b.samples; ++i)
    if (!(H[i] < H[i - 1]))
      throw NumericalError("ball curvature is not decreasing in R between " + std::to_string(R[i - 1]) + " and " +
                           std::to_string(R[i]));
  if (!(c <= H.front() && c >= H.back()))
    throw ValidationError("c", "target curvature outside the range over the radius bracket");
  int seg = 0;
  while (seg + 2 < b.samples && H[seg + 1] > c) ++seg;
  double a = R[seg], z = R[seg + 1];
  for (int it = 0; it < 80 && z - a > 1e-9 * L; ++it) {
    const double m = 0.5 * (a + z);
    (ball_curvature(k, m, q) > c ? a : z) = m;
  }
  return 0.5 * (a + z);
}

// ---------------------------------------------------------------------------

BoundaryCurvature boundary_curvature(const Shape& s, const KernelSpec& k, int count,
                                     const BoundaryCurvatureOptions& opt) {
  require_planar(k);
  if (count < 1) throw ValidationError("count", "need at least one sample");
  const auto traces = boundary_samples(s, count, opt.sampling);
  BoundaryCurvature out;
  for (std::size_t c = 0; c < traces.size(); ++c)
    for (const auto& q : traces[c].samples) {
      out.samples.push_back(q);
      out.component.push_back(static_cast<int>(c));
    }
  const RadialPtr p = radial_profile(k);
  out.l1 = p->total();
  const std::size_t N = out.samples.size();
  out.H.assign(N, kNaN);
  out.dH.assign(N, kNaN);
  const double eps = opt.eps < 0 ? 1e-4 * (k.compact() ? k.r : 1.0) : opt.eps;
  parallel_for(N, [&](std::size_t i) {
    const Vec2 x = out.samples[i].x;
    out.H[i] = curvature_at(s, *p, x, opt.quadrature);
    if (opt.derivative) {
      try {
        out.dH[i] = tangential_derivative(s, k, x, perp(s.normal(x)), eps, opt.derivative_options);
      } catch (const HypothesisViolation&) {
        out.dH[i] = kNaN;
      }
    }
  });
  return out;
}

// ---------------------------------------------------------------------------

double curvature_at_3d(const std::vector<Ball3>& balls, const KernelSpec& k, const Vec3& x) {
  validate(k);
  if (k.n != 3) throw ValidationError("n", "3-D routine needs n = 3");
  for (std::size_t i = 0; i < balls.size(); ++i) {
    if (!(balls[i].R > 0)) throw ValidationError("R", "ball radius must be positive");
    for (std::size_t j = i + 1; j < balls.size(); ++j)
      if ((balls[i].center - balls[j].center).norm() < balls[i].R + balls[j].R)
        throw ValidationError("balls", "balls must be disjoint");
  }
  const RadialPtr p = radial_profile(k);
  const double reach = p->reach();
  double mass = 0;
  for (const auto& b : balls) {
    const double d = (x - b.center).norm(), R = b.R;
    if (d < 1e-14 * R) {
      mass += 4 * kPi * p->mass(R);
      continue;
    }
    // Full shells up to R - d when x is inside; caps on [|d - R|, d + R].
    if (d < R) mass += 4 * kPi * p->mass(R - d);
    const double a = std::abs(d - R), z = std::min(d + R, reach);
    if (z <= a) continue;
    // Solid angle of the cap seen on the sphere |y - x| = rho, integrated by parts against
    // the mass antiderivative so the singular kernel never appears under the integral.
    auto omega = [&](double rho) { return 2 * kPi * (1 - (d * d + rho * rho - R * R) / (2 * d * rho)); };
    auto domega = [&](double rho) { return -2 * kPi * (1 / (2 * d) - (d * d - R * R) / (2 * d * rho * rho)); };
    const double a0 = std::max(a, 1e-12 * z);
    std::vector<double> br;
    if (k.compact() && k.r > a0 && k.r < z) br.push_back(k.r);
    const std::vector<double> cuts = a0 < 0.1 * z ? geometric_nodes(a0, z, 16, br) : [&] {
      std::vector<double> c{a0, z};
      c.insert(c.begin() + 1, br.begin(), br.end());
      return c;
    }();
    double part = omega(z) * p->mass(z) - (a > 0 ? omega(a) * p->mass(a) : 0.0);
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c)
      part -= integrate_panels([&](double rho) { return p->mass(rho) * domega(rho); }, cuts[c], cuts[c + 1], 2, 20);
    mass += part;
  }
  return p->total() - 2 * mass;
}

}  // namespace nlc

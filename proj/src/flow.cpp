#include "nlc/flow.hpp"

#include "nlc/radial.hpp"

#include <algorithm>
#include <cmath>

namespace nlc {

FlowDiagnostics diagnostics(const Mask& m) {
  FlowDiagnostics d;
  std::size_t n = 0;
  Vec2 sum = Vec2::Zero();
  for (int j = 0; j < m.grid.ny; ++j)
    for (int i = 0; i < m.grid.nx; ++i)
      if (m.bits(i, j)) ++n, sum += m.grid.node(i, j);
  d.area = n * m.grid.cell_measure();
  d.centroid = n ? Vec2(sum / double(n)) : Vec2(Vec2::Zero());
  d.perimeter = n ? contour_length(m) : 0.0;
  return d;
}

FlowDiagnostics diagnostics(const Mask& m, const Eigen::ArrayXXd& fraction) {
  FlowDiagnostics d;
  double w = 0;
  Vec2 sum = Vec2::Zero();
  for (int j = 0; j < m.grid.ny; ++j)
    for (int i = 0; i < m.grid.nx; ++i)
      if (fraction(i, j) > 0) w += fraction(i, j), sum += fraction(i, j) * m.grid.node(i, j);
  d.area = w * m.grid.cell_measure();
  d.centroid = w > 0 ? Vec2(sum / w) : Vec2(Vec2::Zero());
  d.perimeter = m.count() ? contour_length(m) : 0.0;
  return d;
}

double square_cut_fraction(double nx, double ny, double s) {
  double a = std::abs(nx), b = std::abs(ny);
  if (a < b) std::swap(a, b);
  if (s < 0) return 1 - square_cut_fraction(a, b, -s);
  if (s >= 0.5 * (a + b)) return 1;
  if (s <= 0.5 * (a - b)) return 0.5 + s / a;
  const double q = 0.5 * (a + b) - s;
  return 1 - q * q / (2 * a * b);
}

Eigen::ArrayXXd cell_fractions(const Eigen::ArrayXXd& f, double iso, double h) {
  const int nx = static_cast<int>(f.rows()), ny = static_cast<int>(f.cols());
  Eigen::ArrayXXd out(nx, ny);
  auto at = [&](int i, int j) { return f(std::clamp(i, 0, nx - 1), std::clamp(j, 0, ny - 1)); };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double v = f(i, j) - iso;
      const double gx = 0.5 * (at(i + 1, j) - at(i - 1, j)), gy = 0.5 * (at(i, j + 1) - at(i, j - 1));
      const double g = std::sqrt(gx * gx + gy * gy);
      // Only cells the front can cross need the reconstruction.
      if (!(g > 0) || std::abs(v) >= g) {
        out(i, j) = v >= 0 ? 1.0 : 0.0;
        continue;
      }
      // Signed distance in cells from the centre to the front, positive on the f >= iso side;
      // that side is where f grows, so the threshold set is {p : p.(-grad f) <= d}.
      out(i, j) = square_cut_fraction(gx / g, gy / g, v / g);
    }
  (void)h;
  return out;
}

FlowState initial_state(const Shape& s, const Grid& grid) { return initial_state(rasterize(s, grid)); }

FlowState initial_state(Mask m) {
  FlowState st;
  // The level field is distance-like and negative inside.
  st.fraction = cell_fractions(-m.level, 0.0, m.grid.h);
  for (int j = 0; j < m.grid.ny; ++j)
    for (int i = 0; i < m.grid.nx; ++i)
      if ((st.fraction(i, j) >= 0.5) != (m.bits(i, j) != 0)) st.fraction(i, j) = m.bits(i, j) ? 0.5 : 0.0;
  st.diag = diagnostics(m, st.fraction);
  st.mask = std::move(m);
  return st;
}

struct FlowStepper::Impl {
  Grid grid;
  FlowOptions opt;
  bool heat = true;
  double dt = 0;
  double threshold = 0.5;
  Convolver conv;
  Impl(Convolver c) : conv(std::move(c)) {}
};

namespace {

Convolver make_convolver(const Grid& g, const FlowVariant& v) {
  if (const auto* hv = std::get_if<HeatVariant>(&v)) {
    if (!(hv->dt > 0)) throw ValidationError("dt", "time step must be positive");
    if (std::sqrt(2 * hv->dt) < 2 * g.h)
      throw ValidationError("dt", "step too small for grid: heat bandwidth sqrt(2 dt) < 2h");
    return Convolver(heat_stencil(hv->dt, g.h));
  }
  const auto& nv = std::get<NonlocalVariant>(v);
  validate(nv.kernel);
  if (nv.kernel.n != 2) throw ValidationError("n", "flow needs a 2-D kernel");
  const RadialPtr p = radial_profile(nv.kernel);
  const double diag = g.h * std::hypot(g.nx, g.ny);
  const int K = static_cast<int>(std::ceil(std::min(p->reach(), diag) / g.h)) + 1;
  return Convolver(kernel_stencil(*p, g.h, K));
}

}  // namespace

FlowStepper::FlowStepper(const Grid& grid, const FlowVariant& v, const FlowOptions& opt)
    : impl_(std::make_unique<Impl>(make_convolver(grid, v))) {
  impl_->grid = grid;
  impl_->opt = opt;
  if (const auto* hv = std::get_if<HeatVariant>(&v)) {
    impl_->heat = true;
    impl_->dt = hv->dt;
    impl_->threshold = 0.5 * impl_->conv.stencil_sum();
  } else {
    impl_->heat = false;
    impl_->dt = std::get<NonlocalVariant>(v).dt;
    impl_->threshold = 0.5 * impl_->conv.stencil_sum();
  }
}

FlowStepper::~FlowStepper() = default;
FlowStepper::FlowStepper(FlowStepper&&) noexcept = default;
FlowStepper& FlowStepper::operator=(FlowStepper&&) noexcept = default;

double FlowStepper::dt() const { return impl_->dt; }
int FlowStepper::half_width() const { return impl_->conv.half_width(); }

FlowState FlowStepper::step(const FlowState& s) const {
  const Impl& m = *impl_;
  if (!(s.mask.grid == m.grid)) throw ValidationError("grid", "state grid differs from the stepper grid");
  const Grid& g = m.grid;
  Eigen::ArrayXXd from_bits;
  if (!s.fraction.size()) from_bits = s.mask.bits.cast<double>();
  const Eigen::ArrayXXd& chi = s.fraction.size() ? s.fraction : from_bits;
  const Eigen::ArrayXXd u = m.conv.apply(chi, m.opt.extension);
  // Ties go inside; the slack absorbs FFT round-off on exact ties.
  const double cut = m.threshold - 1e-12 * std::max(1.0, m.threshold);
  const int K = m.conv.half_width();

  // With zero extension u vanishes beyond the support of chi grown by K.
  int i0 = 0, i1 = g.nx - 1, j0 = 0, j1 = g.ny - 1;
  if (m.opt.extension == Extension::zero) {
    i0 = g.nx, i1 = -1, j0 = g.ny, j1 = -1;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        if (chi(i, j) != 0) i0 = std::min(i0, i), i1 = std::max(i1, i), j0 = std::min(j0, j), j1 = std::max(j1, j);
    if (i1 >= 0) {
      i0 = std::max(i0 - K - 1, 0), i1 = std::min(i1 + K + 1, g.nx - 1);
      j0 = std::max(j0 - K - 1, 0), j1 = std::min(j1 + K + 1, g.ny - 1);
    }
  }

  FlowState out;
  out.k = s.k + 1;
  out.t = out.k * m.dt;
  Bits bits = Bits::Zero(g.nx, g.ny);
  out.fraction = Eigen::ArrayXXd::Zero(g.nx, g.ny);
  Mask mk;
  mk.grid = g;
  mk.level = Eigen::ArrayXXd::Constant(g.nx, g.ny, g.h);
  if (i1 >= i0 && j1 >= j0) {
    const int bx = i1 - i0 + 1, by = j1 - j0 + 1;
    out.fraction.block(i0, j0, bx, by) = cell_fractions(u.block(i0, j0, bx, by), cut, g.h);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) {
        const bool in = u(i, j) >= cut;
        bits(i, j) = in ? 1 : 0;
        if (in && m.opt.extension == Extension::zero && std::min({i, j, g.nx - 1 - i, g.ny - 1 - j}) < K)
          throw NumericalError("mask left the padded grid at step " + std::to_string(out.k));
        // Distance-like near the front: (threshold - u) / |grad u|.
        const double gx = 0.5 * (u(std::min(i + 1, g.nx - 1), j) - u(std::max(i - 1, 0), j));
        const double gy = 0.5 * (u(i, std::min(j + 1, g.ny - 1)) - u(i, std::max(j - 1, 0)));
        const double gn = std::sqrt(gx * gx + gy * gy);
        double l = gn > 1e-12 * m.threshold ? (cut - u(i, j)) / gn * g.h : (in ? -g.h : g.h);
        if (in && !(l < 0)) l = -1e-12 * g.h;
        if (!in && l < 0) l = 0;
        mk.level(i, j) = l;
        // Fractions must agree with the node threshold.
        double& f = out.fraction(i, j);
        if (in && f < 0.5) f = 0.5;
        if (!in && f >= 0.5) f = std::nextafter(0.5, 0.0);
      }
  }
  mk.bits = std::move(bits);
  out.mask = std::move(mk);
  out.diag = diagnostics(out.mask, out.fraction);
  return out;
}

FlowState mbo_step(const FlowState& s, const FlowVariant& v, const FlowOptions& opt) {
  return FlowStepper(s.mask.grid, v, opt).step(s);
}

FlowRun flow_run(const FlowState& initial, const FlowVariant& v, int steps, const FlowRunOptions& opt) {
  if (steps < 1) throw ValidationError("steps", "need at least one step");
  const FlowStepper stepper(initial.mask.grid, v, opt.step);
  FlowRun run;
  run.series.push_back({initial.k, initial.t, initial.diag});
  FlowState cur = initial;
  for (int n = 0; n < steps; ++n) {
    FlowState next = stepper.step(cur);
    run.series.push_back({next.k, next.t, next.diag});
    if (opt.keep_masks) run.masks.push_back(next.mask);
    const bool same = (next.mask.bits == cur.mask.bits).all();
    cur = std::move(next);
    if (cur.mask.count() == 0) {
      run.stop = "extinction";
      break;
    }
    if (same) {
      run.stop = "fixed_point";
      break;
    }
  }
  run.final_mask = std::move(cur.mask);
  return run;
}

FlowRun flow_run(const Shape& initial, const Grid& grid, const FlowVariant& v, int steps, const FlowRunOptions& opt) {
  return flow_run(initial_state(initial, grid), v, steps, opt);
}

}  // namespace nlc

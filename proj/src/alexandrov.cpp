#include "nlc/alexandrov.hpp"

#include "nlc/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

namespace nlc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double default_h(const Shape& s) {
  if (const auto* m = s.as<MaskShape>()) return m->mask->grid.h;
  double rad = 0;
  if (const auto* b = s.as<Ball>()) {
    rad = b->R;
  } else if (const auto* u = s.as<BallUnion>()) {
    rad = kInf;
    for (const Ball& b : u->balls) rad = std::min(rad, b.R);
  } else {
    rad = std::sqrt(s.area() / kPi);
  }
  if (!(rad > 0) || !std::isfinite(rad)) throw ValidationError("shape", "cannot size a grid for this shape");
  return rad / 128;
}

Mask shape_mask(const Shape& s, double h) {
  if (const auto* m = s.as<MaskShape>()) return *m->mask;
  return rasterize(s, grid_for(s, h, 6 * h), 6 * h);
}

Mask select_components(const Mask& m, const Eigen::ArrayXXi& label, const std::vector<int>& ids) {
  std::vector<char> keep(label.maxCoeff() + 1, 0);
  for (int id : ids) keep[id + 1] = 1;
  Bits bits = Bits::Zero(m.grid.nx, m.grid.ny);
  for (int j = 0; j < m.grid.ny; ++j)
    for (int i = 0; i < m.grid.nx; ++i)
      if (label(i, j) > 0 && keep[label(i, j)]) bits(i, j) = 1;
  return make_mask(m.grid, std::move(bits));
}

// Set nodes with a 4-neighbour outside, per component.
std::vector<std::vector<Vec2>> component_edges(const Mask& m, const Eigen::ArrayXXi& label, int count) {
  std::vector<std::vector<Vec2>> out(count);
  for (int j = 0; j < m.grid.ny; ++j)
    for (int i = 0; i < m.grid.nx; ++i) {
      if (!m.bits(i, j)) continue;
      if (m.bit(i + 1, j) && m.bit(i - 1, j) && m.bit(i, j + 1) && m.bit(i, j - 1)) continue;
      out[label(i, j) - 1].push_back(m.grid.node(i, j));
    }
  return out;
}

double min_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  double best = kInf;
  for (const Vec2& p : a)
    for (const Vec2& q : b) best = std::min(best, (p - q).squaredNorm());
  return std::sqrt(best);
}

}  // namespace

Constancy constancy_check(const BoundaryCurvature& bc, double tol) {
  if (bc.H.size() < 64) throw ValidationError("samples", "constancy check needs at least 64 boundary samples");
  Constancy c;
  c.l1 = bc.l1;
  c.tol = tol;
  c.mean = std::accumulate(bc.H.begin(), bc.H.end(), 0.0) / bc.H.size();
  for (std::size_t i = 0; i < bc.H.size(); ++i) {
    const double d = std::abs(bc.H[i] - c.mean);
    if (d > c.max_dev) c.max_dev = d, c.worst = i;
  }
  c.is_constant = c.max_dev <= tol * bc.l1;
  return c;
}

bool MovingPlaneReport::passes() const {
  return !inconclusive && std::all_of(component_symmetric.begin(), component_symmetric.end(), [](bool b) { return b; });
}

MovingPlaneReport moving_plane_run(const Shape& s, const KernelSpec& k, const Vec2& e_in,
                                   const MovingPlaneOptions& opt) {
  validate(k);
  if (!s.bounded()) throw ValidationError("shape", "moving plane needs a bounded shape");
  if (std::abs(e_in.norm() - 1) > 1e-9) throw ValidationError("e", "direction must be a unit vector");
  const Vec2 e = e_in.normalized();
  const double h = opt.h > 0 ? opt.h : default_h(s);
  const Mask mask = shape_mask(s, h);
  if (mask.count() == 0) throw ValidationError("shape", "shape covers no grid nodes");
  const double r = k.r;

  MovingPlaneReport rep;
  rep.e = e;
  rep.h = mask.grid.h;
  rep.perimeter = contour_length(mask);
  CriticalOptions co;
  co.kappa = opt.kappa;
  const CriticalPlane whole = critical_lambda(mask, e, co);
  rep.lambda = whole.lambda;
  rep.contact = whole.contact;
  rep.x0 = whole.x0;
  const Hyperplane plane{e, whole.lambda};
  rep.sym_diff = whole.reflected_sym_diff;
  rep.windowed_sym_diff = std::isfinite(r) ? reflected_sym_diff(mask, plane, Window{whole.x0, r}) : rep.sym_diff;

  // Components and their influence graph.
  int count = 0;
  const Eigen::ArrayXXi label = label_components(mask, &count);
  rep.components = count;
  const auto edges = component_edges(mask, label, count);
  std::vector<std::vector<int>> adj(count);
  for (int a = 0; a < count; ++a)
    for (int b = a + 1; b < count; ++b) {
      const double gap = std::isfinite(r) ? min_distance(edges[a], edges[b]) - rep.h : -kInf;
      if (gap < r - 2 * rep.h) {
        rep.influence.emplace_back(a, b);
        adj[a].push_back(b);
        adj[b].push_back(a);
      }
    }
  std::vector<int> group_of(count, -1);
  std::vector<std::vector<int>> groups;
  for (int c = 0; c < count; ++c) {
    if (group_of[c] >= 0) continue;
    std::vector<int> g{c}, stack{c};
    group_of[c] = static_cast<int>(groups.size());
    while (!stack.empty()) {
      const int a = stack.back();
      stack.pop_back();
      for (int b : adj[a])
        if (group_of[b] < 0) group_of[b] = group_of[c], g.push_back(b), stack.push_back(b);
    }
    std::sort(g.begin(), g.end());
    groups.push_back(std::move(g));
  }
  // Sweep order: the group reached first by the incoming plane goes first.
  std::vector<double> top(groups.size(), -kInf);
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (int c : groups[g])
      for (const Vec2& p : edges[c]) top[g] = std::max(top[g], p.dot(e));
  std::vector<std::size_t> order(groups.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return top[a] > top[b]; });

  rep.component_symmetric.assign(count, false);
  for (std::size_t n = 0; n < order.size(); ++n) {
    if (static_cast<int>(n) >= opt.max_iterations) {
      rep.inconclusive = true;
      break;
    }
    const auto& g = groups[order[n]];
    PlaneStage st;
    st.group = g;
    const Mask sub = count == 1 ? mask : select_components(mask, label, g);
    st.plane = count == 1 ? whole : critical_lambda(sub, e, co);
    st.sym_diff = st.plane.reflected_sym_diff;
    st.symmetric = st.sym_diff <= opt.kappa * rep.h * contour_length(sub);
    for (int c : g) rep.component_symmetric[c] = st.symmetric;
    rep.stages.push_back(std::move(st));
  }

  // Propagation chain on the lower boundary of the group holding x0.
  int home = 0;
  {
    double best = kInf;
    for (int c = 0; c < count; ++c)
      for (const Vec2& p : edges[c])
        if ((p - whole.x0).squaredNorm() < best) best = (p - whole.x0).squaredNorm(), home = c;
  }
  std::vector<Vec2> lower;
  for (int c : groups[group_of[home]])
    for (const Vec2& p : edges[c])
      if (p.dot(e) < whole.lambda) lower.push_back(p);
  rep.chain.push_back(whole.x0);
  if (std::isfinite(r) && !lower.empty()) {
    // z0 in B_r(x0) at distance >= r/2 when the boundary allows it.
    const Vec2* z0 = nullptr;
    double far = -1;
    for (const Vec2& p : lower) {
      const double d = (p - whole.x0).norm();
      if (d < r && d >= 0.5 * r && d > far) far = d, z0 = &p;
    }
    if (z0) rep.chain.push_back(*z0);
    std::vector<double> cover(lower.size(), kInf);
    auto absorb = [&](const Vec2& z) {
      for (std::size_t i = 0; i < lower.size(); ++i) cover[i] = std::min(cover[i], (lower[i] - z).norm());
    };
    for (const Vec2& z : rep.chain) absorb(z);
    const std::size_t cap = static_cast<std::size_t>(rep.perimeter / (0.5 * r)) + 1;
    while (rep.chain.size() < cap) {
      std::size_t next = lower.size();
      double best = kInf;
      for (std::size_t i = 0; i < lower.size(); ++i)
        if (cover[i] >= r && cover[i] < best) best = cover[i], next = i;
      if (next == lower.size()) {
        rep.chain_covers = true;
        break;
      }
      if (best > 2 * r) break;  // the rest of the lower boundary is out of reach
      rep.chain.push_back(lower[next]);
      absorb(lower[next]);
    }
  } else {
    rep.chain_covers = true;
  }
  rep.min_separation = kInf;
  for (std::size_t a = 0; a < rep.chain.size(); ++a)
    for (std::size_t b = a + 1; b < rep.chain.size(); ++b)
      rep.min_separation = std::min(rep.min_separation, (rep.chain[a] - rep.chain[b]).norm());
  return rep;
}

std::string to_string(VerdictKind v) {
  switch (v) {
    case VerdictKind::Ball: return "Ball";
    case VerdictKind::UnionOfBalls: return "UnionOfBalls";
    case VerdictKind::NotConstant: return "NotConstant";
    case VerdictKind::Inconclusive: return "Inconclusive";
  }
  return "unknown";
}

FittedBall fit_circle(const std::vector<Vec2>& pts) {
  if (pts.size() < 3) throw ValidationError("points", "circle fit needs at least three points");
  // x^2 + y^2 = 2 a x + 2 b y + c, linear in (a, b, c).
  Eigen::MatrixXd A(pts.size(), 3);
  Eigen::VectorXd rhs(pts.size());
  Vec2 mean = Vec2::Zero();
  for (const Vec2& p : pts) mean += p;
  mean /= double(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec2 q = pts[i] - mean;
    A.row(i) << 2 * q.x(), 2 * q.y(), 1;
    rhs(i) = q.squaredNorm();
  }
  const Eigen::Vector3d sol = A.colPivHouseholderQr().solve(rhs);
  FittedBall f;
  f.center = mean + Vec2(sol(0), sol(1));
  f.R = std::sqrt(std::max(0.0, sol(2) + sol(0) * sol(0) + sol(1) * sol(1)));
  double ss = 0;
  for (const Vec2& p : pts) ss += std::pow((p - f.center).norm() - f.R, 2);
  f.residual = std::sqrt(ss / pts.size());
  return f;
}

ShapeVerdict classify(const Shape& s, const KernelSpec& k, int directions, double tol, const ClassifyOptions& opt) {
  validate(k);
  if (directions < 8) throw ValidationError("dirs", "need at least 8 directions");
  if (!s.bounded()) throw ValidationError("shape", "classification needs a bounded shape");
  ShapeVerdict v;
  v.tol = tol;

  BoundaryCurvatureOptions bo;
  bo.quadrature = opt.quadrature;
  const BoundaryCurvature bc = boundary_curvature(s, k, opt.samples, bo);
  v.constancy = constancy_check(bc, tol);
  v.max_deviation = v.constancy.max_dev;

  v.directions.resize(directions);
  parallel_for(directions, [&](std::size_t i) {
    const double th = 2 * kPi * double(i) / directions;
    v.directions[i] = moving_plane_run(s, k, Vec2(std::cos(th), std::sin(th)), opt.plane);
  });
  const double h = v.directions.front().h;
  v.tol_geom = 2 * h;
  const int components = v.directions.front().components;
  bool planes_pass = true, capped = false;
  for (const auto& d : v.directions) {
    planes_pass = planes_pass && d.passes();
    capped = capped || d.inconclusive;
  }

  // Circle per boundary component.
  const int traces = bc.component.empty() ? 0 : bc.component.back() + 1;
  for (int c = 0; c < traces; ++c) {
    std::vector<Vec2> pts;
    for (std::size_t i = 0; i < bc.samples.size(); ++i)
      if (bc.component[i] == c) pts.push_back(bc.samples[i].x);
    if (pts.size() >= 3) v.balls.push_back(fit_circle(pts));
  }
  v.min_gap = kInf;
  for (std::size_t a = 0; a < v.balls.size(); ++a)
    for (std::size_t b = a + 1; b < v.balls.size(); ++b)
      v.min_gap = std::min(v.min_gap, (v.balls[a].center - v.balls[b].center).norm() - v.balls[a].R - v.balls[b].R);

  if (capped) {
    v.kind = VerdictKind::Inconclusive;
    v.reason = "moving-plane iteration cap reached";
  } else if (!v.constancy.is_constant) {
    v.kind = VerdictKind::NotConstant;
    v.reason = "boundary curvature is not constant";
  } else if (!planes_pass) {
    v.kind = VerdictKind::Inconclusive;
    v.reason = "constant curvature but a reflection test failed";
  } else if (components == 1) {
    v.kind = VerdictKind::Ball;
  } else if (traces == components && v.min_gap >= k.r - v.tol_geom) {
    v.kind = VerdictKind::UnionOfBalls;
  } else {
    v.kind = VerdictKind::Inconclusive;
    v.reason = "symmetric components closer than the kernel radius";
  }
  return v;
}

double nondegeneracy_quotient(const Shape& s, double r, int samples, double h) {
  if (!(r > 0) || !std::isfinite(r)) throw ValidationError("r", "radius must be positive and finite");
  if (samples < 2) throw ValidationError("samples", "need at least two samples");
  SampleOptions so;
  auto traces = boundary_samples(s, samples, so);
  std::vector<Vec2> xs;
  for (const auto& t : traces)
    for (const auto& q : t.samples) xs.push_back(q.x);
  if (xs.size() < 2) throw ValidationError("samples", "need at least two boundary samples");
  Vec2 lo = xs.front(), hi = xs.front();
  for (const Vec2& p : xs) lo = lo.cwiseMin(p), hi = hi.cwiseMax(p);
  if (h <= 0) h = std::min(r, (hi - lo).norm()) / 128;
  const Grid g = Grid::covering(lo.array() - r, hi.array() + r, h, 0);
  std::vector<Vec2> omega;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (s.inside(g.node(i, j))) omega.push_back(g.node(i, j));
  const std::size_t words = (omega.size() + 63) / 64;
  std::vector<std::uint64_t> bits(xs.size() * words, 0);
  parallel_for(xs.size(), [&](std::size_t a) {
    for (std::size_t p = 0; p < omega.size(); ++p)
      if ((omega[p] - xs[a]).squaredNorm() < r * r) bits[a * words + p / 64] |= std::uint64_t(1) << (p % 64);
  });
  double best = kInf;
  for (std::size_t a = 0; a < xs.size(); ++a)
    for (std::size_t b = a + 1; b < xs.size(); ++b) {
      const double d = (xs[a] - xs[b]).norm();
      if (d <= 2 * h) continue;
      std::size_t n = 0;
      for (std::size_t w = 0; w < words; ++w) n += std::popcount(bits[a * words + w] ^ bits[b * words + w]);
      best = std::min(best, n * h * h / d);
    }
  if (!std::isfinite(best)) throw ValidationError("samples", "no sample pair farther apart than 2h");
  return best;
}

}  // namespace nlc

#include "nlc/geometry.hpp"

#include <limits>

namespace nlc {

std::string to_string(Contact c) {
  switch (c) {
    case Contact::interior_touching: return "interior_touching";
    case Contact::non_transversal: return "non_transversal";
    case Contact::both: return "both";
  }
  return "unknown";
}

double reflected_sym_diff(const Mask& m, const Hyperplane& plane, const Window& w) {
  std::size_t n = 0;
  const double r2 = w.radius * w.radius;
  const bool windowed = std::isfinite(w.radius);
  for (int j = 0; j < m.grid.ny; ++j)
    for (int i = 0; i < m.grid.nx; ++i) {
      const Vec2 p = m.grid.node(i, j);
      if (windowed && (p - w.center).squaredNorm() >= r2) continue;
      const bool a = m.bits(i, j) != 0;
      // p lies in R(M) iff R(p) lies in M.
      const bool b = m.level_at(reflect_point(p, plane)) < 0;
      if (a != b) ++n;
    }
  return n * m.grid.cell_measure();
}

namespace {

struct CapNode {
  Vec2 p;
  double s;
};

// Set nodes in the boundary layer, sorted by decreasing x.e. A reflected cap first leaves
// the set through the reflection of its boundary, so these are the only nodes to test.
std::vector<CapNode> boundary_layer(const Mask& m, const Vec2& e) {
  std::vector<CapNode> nodes;
  const double band = -2.0 * m.grid.h;
  for (int j = 0; j < m.grid.ny; ++j)
    for (int i = 0; i < m.grid.nx; ++i) {
      if (!m.bits(i, j)) continue;
      bool edge = m.level(i, j) > band;
      if (!edge)
        edge = !m.bit(i + 1, j) || !m.bit(i - 1, j) || !m.bit(i, j + 1) || !m.bit(i, j - 1);
      if (!edge) continue;
      const Vec2 p = m.grid.node(i, j);
      nodes.push_back({p, p.dot(e)});
    }
  std::sort(nodes.begin(), nodes.end(), [](const CapNode& a, const CapNode& b) { return a.s > b.s; });
  return nodes;
}

// Largest level(R_tau(p)) over the cap, and where it is attained.
double worst_violation(const Mask& m, const std::vector<CapNode>& nodes, const Vec2& e, double tau, double stop,
                       Vec2* where) {
  double worst = -std::numeric_limits<double>::infinity();
  const Hyperplane plane{e, tau};
  for (const CapNode& c : nodes) {
    if (c.s <= tau) break;
    const Vec2 q = reflect_point(c.p, plane);
    const double l = m.level_at(q);
    if (l > worst) {
      worst = l;
      if (where) *where = q;
      if (worst > stop) break;
    }
  }
  return worst;
}

}  // namespace

bool reflected_cap_contained(const Mask& m, const Vec2& e, double tau, double slack) {
  const auto nodes = boundary_layer(m, e);
  return worst_violation(m, nodes, e, tau, slack, nullptr) <= slack;
}

CriticalPlane critical_lambda(const Mask& m, const Vec2& e_in, const CriticalOptions& opt) {
  if (std::abs(e_in.norm() - 1) > 1e-9) throw ValidationError("e", "direction must be a unit vector");
  const Vec2 e = e_in.normalized();
  const double h = m.grid.h;
  const double slack = opt.slack < 0 ? h : opt.slack;
  const double on_plane = opt.on_plane_tol < 0 ? 2 * h : opt.on_plane_tol;
  const auto nodes = boundary_layer(m, e);
  if (nodes.empty()) throw ValidationError("shape", "critical plane of an empty set");
  const double mu = nodes.front().s, smin = nodes.back().s;
  auto contained = [&](double tau) { return worst_violation(m, nodes, e, tau, slack, nullptr) <= slack; };

  CriticalPlane out;
  out.mu = mu;
  const double step = 2 * h;
  double good = mu, bad = mu;
  bool failed = false;
  for (double tau = mu - step; tau > smin - 2 * step; tau -= step) {
    if (contained(tau)) {
      good = tau;
    } else {
      bad = tau;
      failed = true;
      break;
    }
  }
  if (!failed)
    throw NumericalError("reflected cap containment never fails: unbounded or degenerate input");
  while (good - bad > h / 64) {
    const double mid = 0.5 * (good + bad);
    if (contained(mid))
      good = mid;
    else
      bad = mid;
    ++out.bisection_steps;
  }
  // Ties prefer the later plane.
  out.lambda = good;
  const Hyperplane plane{e, out.lambda};
  out.reflected_sym_diff = reflected_sym_diff(m, plane);
  const double perimeter = contour_length(m);

  Vec2 q = Vec2::Zero();
  worst_violation(m, nodes, e, bad, std::numeric_limits<double>::infinity(), &q);
  const Vec2 g = m.level_gradient(q);
  const Vec2 x0 = g.norm() > 0 ? Vec2(q - m.level_at(q) * g.normalized()) : q;

  if (out.reflected_sym_diff <= opt.kappa * h * perimeter) {
    out.contact = Contact::both;
    // Report the boundary point on the plane, on the side of the cap.
    double best = std::numeric_limits<double>::infinity();
    for (const CapNode& c : nodes)
      if (std::abs(c.s - out.lambda) < best) best = std::abs(c.s - out.lambda), out.x0 = c.p;
    const Vec2 gx = m.level_gradient(out.x0);
    if (gx.norm() > 0) out.x0 -= m.level_at(out.x0) * gx.normalized();
    return out;
  }
  out.x0 = x0;
  const Vec2 nu = g.norm() > 0 ? Vec2(g.normalized()) : Vec2(e);
  // Tangency on the plane: the normal is perpendicular to e up to the grid's angular resolution.
  const bool perpendicular = std::abs(nu.dot(e)) <= std::max(opt.angle_tol, std::sqrt(h));
  out.contact = (std::abs(x0.dot(e) - out.lambda) <= on_plane && perpendicular) ? Contact::non_transversal
                                                                                 : Contact::interior_touching;
  return out;
}

CriticalPlane critical_lambda(const Shape& s, const Vec2& e, double h, const CriticalOptions& opt) {
  if (!s.bounded()) throw ValidationError("shape", "critical plane needs a bounded shape");
  return critical_lambda(rasterize(s, grid_for(s, h, 4 * h)), e, opt);
}

}  // namespace nlc

#include "nlc/geometry.hpp"

#include <array>
#include <functional>
#include <deque>
#include <limits>
#include <numeric>

namespace nlc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::Matrix2d rotation(double a) {
  Eigen::Matrix2d q;
  q << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return q;
}

// Roots of A t^2 + 2 B t + C = 0 in (0, tmax).
void push_quadratic_roots(double A, double B, double C, double tmax, std::vector<double>& out) {
  const double disc = B * B - A * C;
  if (!(disc > 0) || A == 0) return;
  const double sq = std::sqrt(disc);
  const double q = -B - std::copysign(sq, B);
  const double t1 = q / A;
  const double t2 = q != 0 ? C / q : -t1;
  for (double t : {t1, t2})
    if (t > 0 && t < tmax) out.push_back(t);
}

void segment_crossing(const Vec2& o, const Vec2& d, const Vec2& p0, const Vec2& p1, double tmax,
                      std::vector<double>& out) {
  const Vec2 e = p1 - p0;
  const double den = cross(d, e);
  if (std::abs(den) < 1e-300) return;
  const Vec2 w = p0 - o;
  const double t = cross(w, e) / den;
  const double u = cross(w, d) / den;
  if (u >= -1e-12 && u <= 1 + 1e-12 && t > 0 && t < tmax) out.push_back(t);
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b, double* param = nullptr) {
  const Vec2 e = b - a;
  const double l2 = e.squaredNorm();
  double u = l2 > 0 ? (p - a).dot(e) / l2 : 0.0;
  u = std::clamp(u, 0.0, 1.0);
  if (param) *param = u;
  return (p - (a + u * e)).norm();
}

bool polygon_contains(const std::vector<Vec2>& v, const Vec2& p) {
  bool in = false;
  const std::size_t n = v.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    if ((v[i].y() > p.y()) != (v[j].y() > p.y())) {
      const double x = v[j].x() + (p.y() - v[j].y()) * (v[i].x() - v[j].x()) / (v[i].y() - v[j].y());
      if (p.x() < x) in = !in;
    }
  }
  return in;
}

double shoelace(const std::vector<Vec2>& v) {
  double a = 0;
  for (std::size_t i = 0, n = v.size(); i < n; ++i) a += cross(v[i], v[(i + 1) % n]);
  return 0.5 * a;
}

Vec2 edge_normal(const Vec2& a, const Vec2& b) {
  const Vec2 t = (b - a).normalized();
  return {t.y(), -t.x()};
}

double ellipse_perimeter(double a, double b) {
  double s = 0;
  const int m = 4096;
  for (int k = 0; k < m; ++k) {
    const double t = 2 * kPi * (k + 0.5) / m;
    s += std::hypot(a * std::sin(t), b * std::cos(t));
  }
  return s * 2 * kPi / m;
}

}  // namespace

// ---------------------------------------------------------------------------

Grid Grid::covering(const Vec2& lo, const Vec2& hi, double h, double padding) {
  if (!(h > 0)) throw ValidationError("grid_h", "grid spacing must be positive");
  Grid g;
  g.h = h;
  const long i0 = static_cast<long>(std::floor((lo.x() - padding) / h));
  const long i1 = static_cast<long>(std::ceil((hi.x() + padding) / h));
  const long j0 = static_cast<long>(std::floor((lo.y() - padding) / h));
  const long j1 = static_cast<long>(std::ceil((hi.y() + padding) / h));
  if ((i1 - i0 + 1) * (j1 - j0 + 1) > 400'000'000L)
    throw ValidationError("grid_h", "grid would exceed 4e8 nodes");
  g.origin = Vec2(i0 * h, j0 * h);
  g.nx = static_cast<int>(i1 - i0 + 1);
  g.ny = static_cast<int>(j1 - j0 + 1);
  return g;
}

bool Mask::inside(const Vec2& p) const {
  const Vec2 u = (p - grid.origin) / grid.h;
  return bit(static_cast<int>(std::lround(u.x())), static_cast<int>(std::lround(u.y())));
}

double Mask::level_at(const Vec2& p) const {
  const Vec2 u = (p - grid.origin) / grid.h;
  const double ux = std::clamp(u.x(), 0.0, grid.nx - 1.0);
  const double uy = std::clamp(u.y(), 0.0, grid.ny - 1.0);
  const int i = std::min(static_cast<int>(ux), std::max(grid.nx - 2, 0));
  const int j = std::min(static_cast<int>(uy), std::max(grid.ny - 2, 0));
  const double tx = ux - i, ty = uy - j;
  const int i1 = std::min(i + 1, grid.nx - 1), j1 = std::min(j + 1, grid.ny - 1);
  const double v = (1 - tx) * (1 - ty) * level(i, j) + tx * (1 - ty) * level(i1, j) +
                   (1 - tx) * ty * level(i, j1) + tx * ty * level(i1, j1);
  const double off = grid.h * std::hypot(u.x() - ux, u.y() - uy);
  return off > 0 ? std::max(v, 0.0) + off : v;
}

Vec2 Mask::level_gradient(const Vec2& p) const {
  auto node_grad = [&](int i, int j) {
    const int il = std::max(i - 1, 0), ir = std::min(i + 1, grid.nx - 1);
    const int jl = std::max(j - 1, 0), jr = std::min(j + 1, grid.ny - 1);
    return Vec2((level(ir, j) - level(il, j)) / ((ir - il) * grid.h),
                (level(i, jr) - level(i, jl)) / ((jr - jl) * grid.h));
  };
  const Vec2 u = (p - grid.origin) / grid.h;
  const double ux = std::clamp(u.x(), 0.0, grid.nx - 1.0);
  const double uy = std::clamp(u.y(), 0.0, grid.ny - 1.0);
  const int i = std::min(static_cast<int>(ux), std::max(grid.nx - 2, 0));
  const int j = std::min(static_cast<int>(uy), std::max(grid.ny - 2, 0));
  const double tx = ux - i, ty = uy - j;
  return (1 - tx) * (1 - ty) * node_grad(i, j) + tx * (1 - ty) * node_grad(i + 1, j) +
         (1 - tx) * ty * node_grad(i, j + 1) + tx * ty * node_grad(i + 1, j + 1);
}

std::size_t Mask::count() const {
  return static_cast<std::size_t>((bits != 0).count());
}

namespace {

// 1-D squared distance transform (Felzenszwalb & Huttenlocher); "no feature" is kFar.
constexpr double kFar = 1e20;

void dt1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    double s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

// Squared distance (in cells) from each node to the nearest node with feature(i, j).
Eigen::ArrayXXd squared_edt(const Bits& bits, bool feature) {
  const int nx = static_cast<int>(bits.rows()), ny = static_cast<int>(bits.cols());
  Eigen::ArrayXXd g(nx, ny);
  const int m = std::max(nx, ny);
  std::vector<double> f(m), d(m), z(m + 1);
  std::vector<int> v(m);
  for (int i = 0; i < nx; ++i) {
    f.resize(ny);
    d.resize(ny);
    for (int j = 0; j < ny; ++j) f[j] = ((bits(i, j) != 0) == feature) ? 0.0 : kFar;
    dt1d(f, d, v, z);
    for (int j = 0; j < ny; ++j) g(i, j) = d[j];
  }
  for (int j = 0; j < ny; ++j) {
    f.resize(nx);
    d.resize(nx);
    for (int i = 0; i < nx; ++i) f[i] = g(i, j);
    dt1d(f, d, v, z);
    for (int i = 0; i < nx; ++i) g(i, j) = d[i];
  }
  return g;
}

}  // namespace

Eigen::ArrayXXd signed_distance(const Grid& grid, const Bits& bits) {
  const Eigen::ArrayXXd to_in = squared_edt(bits, true);
  const Eigen::ArrayXXd to_out = squared_edt(bits, false);
  const double big = grid.h * (grid.nx + grid.ny);
  Eigen::ArrayXXd level(grid.nx, grid.ny);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      if (bits(i, j)) {
        const double d = to_out(i, j) < 1e19 ? std::sqrt(to_out(i, j)) * grid.h : big;
        level(i, j) = -(d - 0.5 * grid.h);
      } else {
        const double d = to_in(i, j) < 1e19 ? std::sqrt(to_in(i, j)) * grid.h : big;
        level(i, j) = d - 0.5 * grid.h;
      }
    }
  return level;
}

Mask make_mask(const Grid& grid, Bits bits) {
  if (bits.rows() != grid.nx || bits.cols() != grid.ny)
    throw ValidationError("mask", "bit array does not match grid dimensions");
  Mask m;
  m.grid = grid;
  m.level = signed_distance(grid, bits);
  m.bits = std::move(bits);
  return m;
}

// ---------------------------------------------------------------------------

double GraphPatch::value(double x) const {
  const int n = static_cast<int>(f.size());
  if (n == 1) return f[0];
  const double u = (std::clamp(x, x0, x1) - x0) / (x1 - x0) * (n - 1);
  const int k = std::min(static_cast<int>(u), n - 2);
  return f[k] + (u - k) * (f[k + 1] - f[k]);
}

double GraphPatch::slope(double x) const {
  const int n = static_cast<int>(f.size());
  if (n == 1 || x < x0 || x > x1) return 0;
  const double dx = (x1 - x0) / (n - 1);
  const int k = std::min(static_cast<int>((x - x0) / dx), n - 2);
  return (f[k + 1] - f[k]) / dx;
}

Polygon make_polygon(std::vector<Vec2> v) {
  if (v.size() < 3) throw ValidationError("vertices", "polygon needs at least 3 vertices");
  if (shoelace(v) <= 0) throw ValidationError("vertices", "polygon must be counter-clockwise");
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = v[i], b = v[(i + 1) % n];
    if ((b - a).norm() == 0) throw ValidationError("vertices", "repeated vertex");
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      const Vec2 c = v[j], d = v[(j + 1) % n];
      const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
      const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
      if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0)
        throw ValidationError("vertices", "polygon is not simple");
    }
  }
  return Polygon{std::move(v)};
}

GraphPatch make_graph_patch(double x0, double x1, std::vector<double> f, double slope_bound) {
  if (!(x1 > x0)) throw ValidationError("window", "graph window must have x1 > x0");
  if (f.size() < 2) throw ValidationError("f", "graph patch needs at least two samples");
  if (!(slope_bound >= 0 && slope_bound < 1)) throw ValidationError("M", "slope bound must lie in [0, 1)");
  GraphPatch g{x0, x1, std::move(f)};
  const double dx = (x1 - x0) / (g.f.size() - 1);
  for (std::size_t k = 0; k + 1 < g.f.size(); ++k)
    if (std::abs(g.f[k + 1] - g.f[k]) / dx > slope_bound + 1e-12)
      throw ValidationError("f", "graph slope exceeds the declared bound M");
  return g;
}

Polygon rounded_square(const Vec2& c, double side, double radius, int arc_points) {
  const double h = 0.5 * side;
  if (!(radius >= 0 && radius < h)) throw ValidationError("radius", "corner radius must be in [0, side/2)");
  std::vector<Vec2> v;
  const std::array<Vec2, 4> corner{Vec2(h - radius, -h + radius), Vec2(h - radius, h - radius),
                                   Vec2(-h + radius, h - radius), Vec2(-h + radius, -h + radius)};
  for (int q = 0; q < 4; ++q) {
    const double a0 = -kPi / 2 + q * kPi / 2;
    if (radius == 0) {
      v.push_back(c + corner[q]);
      continue;
    }
    for (int k = 0; k <= arc_points; ++k) {
      const double a = a0 + (kPi / 2) * k / arc_points;
      v.push_back(c + corner[q] + radius * Vec2(std::cos(a), std::sin(a)));
    }
  }
  return make_polygon(std::move(v));
}

Polygon star_polygon(const Vec2& c, double R0, const std::vector<double>& amp, const std::vector<double>& phase,
                     int points) {
  std::vector<Vec2> v(points);
  for (int k = 0; k < points; ++k) {
    const double t = 2 * kPi * k / points;
    double rad = 1;
    for (std::size_t m = 0; m < amp.size(); ++m) rad += amp[m] * std::cos((m + 2) * t + phase[m]);
    v[k] = c + R0 * rad * Vec2(std::cos(t), std::sin(t));
  }
  return make_polygon(std::move(v));
}

Eigen::MatrixXd gaps(const BallUnion& u) {
  const int n = static_cast<int>(u.balls.size());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) g(i, j) = (u.balls[i].center - u.balls[j].center).norm() - u.balls[i].R - u.balls[j].R;
  return g;
}

// ---------------------------------------------------------------------------

std::string Shape::kind() const {
  return std::visit(overloaded{[](const Ball&) { return std::string("ball"); },
                               [](const BallUnion&) { return std::string("union_of_balls"); },
                               [](const Ellipse&) { return std::string("ellipse"); },
                               [](const Polygon&) { return std::string("polygon"); },
                               [](const GraphPatch&) { return std::string("graph_patch"); },
                               [](const HalfPlane&) { return std::string("half_plane"); },
                               [](const MaskShape&) { return std::string("mask"); },
                               [](const Reflected& r) { return "reflected_" + r.inner->kind(); }},
                    v_);
}

bool Shape::inside(const Vec2& p) const {
  return std::visit(
      overloaded{
          [&](const Ball& b) { return (p - b.center).squaredNorm() < b.R * b.R; },
          [&](const BallUnion& u) {
            return std::any_of(u.balls.begin(), u.balls.end(),
                               [&](const Ball& b) { return (p - b.center).squaredNorm() < b.R * b.R; });
          },
          [&](const Ellipse& e) {
            const Vec2 q = rotation(-e.angle) * (p - e.center);
            return (q.x() / e.a) * (q.x() / e.a) + (q.y() / e.b) * (q.y() / e.b) < 1;
          },
          [&](const Polygon& poly) { return polygon_contains(poly.vertices, p); },
          [&](const GraphPatch& g) { return p.y() < g.value(p.x()); },
          [&](const HalfPlane& h) { return p.dot(h.normal) < h.offset; },
          [&](const MaskShape& m) { return m.mask->inside(p); },
          [&](const Reflected& r) { return r.inner->inside(reflect_point(p, r.plane)); }},
      v_);
}

double Shape::level(const Vec2& p) const {
  return std::visit(
      overloaded{
          [&](const Ball& b) { return (p - b.center).norm() - b.R; },
          [&](const BallUnion& u) {
            double m = kInf;
            for (const Ball& b : u.balls) m = std::min(m, (p - b.center).norm() - b.R);
            return m;
          },
          [&](const Ellipse& e) {
            const Vec2 q = rotation(-e.angle) * (p - e.center);
            const double g = std::hypot(q.x() / e.a, q.y() / e.b);
            if (g == 0) return -std::min(e.a, e.b);
            const double gn = std::hypot(q.x() / (e.a * e.a), q.y() / (e.b * e.b)) / g;
            return (g - 1) / gn;
          },
          [&](const Polygon& poly) {
            double d = kInf;
            const auto& v = poly.vertices;
            for (std::size_t i = 0; i < v.size(); ++i)
              d = std::min(d, point_segment_distance(p, v[i], v[(i + 1) % v.size()]));
            return polygon_contains(v, p) ? -d : d;
          },
          [&](const GraphPatch& g) {
            const double s = g.slope(p.x());
            return (p.y() - g.value(p.x())) / std::sqrt(1 + s * s);
          },
          [&](const HalfPlane& h) { return p.dot(h.normal) - h.offset; },
          [&](const MaskShape& m) { return m.mask->level_at(p); },
          [&](const Reflected& r) { return r.inner->level(reflect_point(p, r.plane)); }},
      v_);
}

Vec2 Shape::normal(const Vec2& p) const {
  return std::visit(
      overloaded{
          [&](const Ball& b) -> Vec2 {
            const Vec2 d = p - b.center;
            return d.norm() > 0 ? Vec2(d.normalized()) : Vec2(1, 0);
          },
          [&](const BallUnion& u) -> Vec2 {
            const Ball* best = nullptr;
            double m = kInf;
            for (const Ball& b : u.balls) {
              const double l = std::abs((p - b.center).norm() - b.R);
              if (l < m) m = l, best = &b;
            }
            if (!best) return Vec2(1, 0);
            const Vec2 d = p - best->center;
            return d.norm() > 0 ? Vec2(d.normalized()) : Vec2(1, 0);
          },
          [&](const Ellipse& e) -> Vec2 {
            const Eigen::Matrix2d q = rotation(e.angle);
            const Vec2 l = q.transpose() * (p - e.center);
            const Vec2 g(l.x() / (e.a * e.a), l.y() / (e.b * e.b));
            return g.norm() > 0 ? Vec2(q * g.normalized()) : Vec2(q.col(0));
          },
          [&](const Polygon& poly) -> Vec2 {
            const auto& v = poly.vertices;
            const std::size_t n = v.size();
            double best = kInf, param = 0;
            std::size_t k = 0;
            for (std::size_t i = 0; i < n; ++i) {
              double u;
              const double d = point_segment_distance(p, v[i], v[(i + 1) % n], &u);
              if (d < best) best = d, k = i, param = u;
            }
            const Vec2 nk = edge_normal(v[k], v[(k + 1) % n]);
            const double tol = 1e-9;
            if (param <= tol) return (nk + edge_normal(v[(k + n - 1) % n], v[k])).normalized();
            if (param >= 1 - tol) return (nk + edge_normal(v[(k + 1) % n], v[(k + 2) % n])).normalized();
            return nk;
          },
          [&](const GraphPatch& g) -> Vec2 { return Vec2(-g.slope(p.x()), 1).normalized(); },
          [&](const HalfPlane& h) -> Vec2 { return h.normal.normalized(); },
          [&](const MaskShape& m) -> Vec2 {
            const Vec2 g = m.mask->level_gradient(p);
            return g.norm() > 0 ? Vec2(g.normalized()) : Vec2(1, 0);
          },
          [&](const Reflected& r) -> Vec2 {
            return reflect_vector(r.inner->normal(reflect_point(p, r.plane)), r.plane.e);
          }},
      v_);
}

void Shape::crossings(const Vec2& o, const Vec2& d, double tmax, std::vector<double>& out) const {
  std::visit(
      overloaded{
          [&](const Ball& b) {
            const Vec2 w = o - b.center;
            push_quadratic_roots(1.0, d.dot(w), w.squaredNorm() - b.R * b.R, tmax, out);
          },
          [&](const BallUnion& u) {
            for (const Ball& b : u.balls) {
              const Vec2 w = o - b.center;
              push_quadratic_roots(1.0, d.dot(w), w.squaredNorm() - b.R * b.R, tmax, out);
            }
          },
          [&](const Ellipse& e) {
            const Eigen::Matrix2d q = rotation(-e.angle);
            const Vec2 lo = q * (o - e.center), ld = q * d;
            const Vec2 O(lo.x() / e.a, lo.y() / e.b), D(ld.x() / e.a, ld.y() / e.b);
            push_quadratic_roots(D.squaredNorm(), O.dot(D), O.squaredNorm() - 1, tmax, out);
          },
          [&](const Polygon& poly) {
            const auto& v = poly.vertices;
            for (std::size_t i = 0; i < v.size(); ++i) segment_crossing(o, d, v[i], v[(i + 1) % v.size()], tmax, out);
          },
          [&](const GraphPatch& g) {
            const int n = static_cast<int>(g.f.size());
            const double dx = (g.x1 - g.x0) / (n - 1);
            for (int k = 0; k + 1 < n; ++k)
              segment_crossing(o, d, Vec2(g.x0 + k * dx, g.f[k]), Vec2(g.x0 + (k + 1) * dx, g.f[k + 1]), tmax, out);
            if (d.y() != 0) {
              const double tl = (g.f.front() - o.y()) / d.y();
              if (tl > 0 && tl < tmax && o.x() + tl * d.x() <= g.x0) out.push_back(tl);
              const double tr = (g.f.back() - o.y()) / d.y();
              if (tr > 0 && tr < tmax && o.x() + tr * d.x() >= g.x1) out.push_back(tr);
            }
          },
          [&](const HalfPlane& h) {
            const double dn = d.dot(h.normal);
            if (dn == 0) return;
            const double t = (h.offset - o.dot(h.normal)) / dn;
            if (t > 0 && t < tmax) out.push_back(t);
          },
          [&](const MaskShape& ms) {
            // Nearest-node cells change along the half-integer lattice lines.
            const Grid& g = ms.mask->grid;
            for (int axis = 0; axis < 2; ++axis) {
              const double dd = d[axis];
              if (dd == 0) continue;
              const double a = (o[axis] - g.origin[axis]) / g.h - 0.5;
              const double b = a + tmax * dd / g.h;
              const int count = axis == 0 ? g.nx : g.ny;
              const double lo = std::max(std::min(a, b), -1.0), hi = std::min(std::max(a, b), count + 0.0);
              for (double k = std::ceil(lo); k <= hi; k += 1) {
                const double t = (k - a) * g.h / dd;
                if (t > 0 && t < tmax) out.push_back(t);
              }
            }
          },
          [&](const Reflected& r) {
            r.inner->crossings(reflect_point(o, r.plane), reflect_vector(d, r.plane.e), tmax, out);
          }},
      v_);
}

bool Shape::bounded() const {
  return std::visit(overloaded{[](const GraphPatch&) { return false; }, [](const HalfPlane&) { return false; },
                               [](const Reflected& r) { return r.inner->bounded(); },
                               [](const auto&) { return true; }},
                    v_);
}

std::optional<std::pair<Vec2, Vec2>> Shape::bbox() const {
  using Box = std::optional<std::pair<Vec2, Vec2>>;
  return std::visit(
      overloaded{
          [](const Ball& b) -> Box { return std::pair{b.center.array() - b.R, b.center.array() + b.R}; },
          [](const BallUnion& u) -> Box {
            if (u.balls.empty()) return std::nullopt;
            Vec2 lo = Vec2::Constant(kInf), hi = Vec2::Constant(-kInf);
            for (const Ball& b : u.balls) {
              lo = lo.cwiseMin(Vec2(b.center.array() - b.R));
              hi = hi.cwiseMax(Vec2(b.center.array() + b.R));
            }
            return std::pair{lo, hi};
          },
          [](const Ellipse& e) -> Box {
            const double c = std::cos(e.angle), s = std::sin(e.angle);
            const Vec2 half(std::hypot(e.a * c, e.b * s), std::hypot(e.a * s, e.b * c));
            return std::pair{Vec2(e.center - half), Vec2(e.center + half)};
          },
          [](const Polygon& p) -> Box {
            Vec2 lo = Vec2::Constant(kInf), hi = Vec2::Constant(-kInf);
            for (const Vec2& v : p.vertices) lo = lo.cwiseMin(v), hi = hi.cwiseMax(v);
            return std::pair{lo, hi};
          },
          [](const GraphPatch&) -> Box { return std::nullopt; },
          [](const HalfPlane&) -> Box { return std::nullopt; },
          [](const MaskShape& m) -> Box {
            const Mask& k = *m.mask;
            int i0 = k.grid.nx, i1 = -1, j0 = k.grid.ny, j1 = -1;
            for (int j = 0; j < k.grid.ny; ++j)
              for (int i = 0; i < k.grid.nx; ++i)
                if (k.bits(i, j)) i0 = std::min(i0, i), i1 = std::max(i1, i), j0 = std::min(j0, j), j1 = std::max(j1, j);
            if (i1 < 0) return std::nullopt;
            const double h = 0.5 * k.grid.h;
            return std::pair{Vec2(k.grid.node(i0, j0).array() - h), Vec2(k.grid.node(i1, j1).array() + h)};
          },
          [](const Reflected& r) -> Box {
            auto b = r.inner->bbox();
            if (!b) return std::nullopt;
            Vec2 lo = Vec2::Constant(kInf), hi = Vec2::Constant(-kInf);
            for (double x : {b->first.x(), b->second.x()})
              for (double y : {b->first.y(), b->second.y()}) {
                const Vec2 q = reflect_point(Vec2(x, y), r.plane);
                lo = lo.cwiseMin(q), hi = hi.cwiseMax(q);
              }
            return std::pair{lo, hi};
          }},
      v_);
}

double Shape::area() const {
  return std::visit(overloaded{[](const Ball& b) { return kPi * b.R * b.R; },
                               [](const BallUnion& u) {
                                 double a = 0;
                                 for (const Ball& b : u.balls) a += kPi * b.R * b.R;
                                 for (std::size_t i = 0; i < u.balls.size(); ++i)
                                   for (std::size_t j = i + 1; j < u.balls.size(); ++j)
                                     a -= lens_area(u.balls[i].R, u.balls[j].R,
                                                    (u.balls[i].center - u.balls[j].center).norm());
                                 return a;
                               },
                               [](const Ellipse& e) { return kPi * e.a * e.b; },
                               [](const Polygon& p) { return shoelace(p.vertices); },
                               [](const GraphPatch&) { return kInf; }, [](const HalfPlane&) { return kInf; },
                               [](const MaskShape& m) { return m.mask->area(); },
                               [](const Reflected& r) { return r.inner->area(); }},
                    v_);
}

double Shape::perimeter() const {
  return std::visit(overloaded{[](const Ball& b) { return 2 * kPi * b.R; },
                               [this](const BallUnion& u) {
                                 double p = 0;
                                 for (const Ball& b : u.balls) p += 2 * kPi * b.R;
                                 const Eigen::MatrixXd g = gaps(u);
                                 if (u.balls.size() > 1 && (g.array() < 0).any()) {
                                   p = 0;
                                   for (const auto& t : boundary_samples(*this, 4096)) p += t.length;
                                 }
                                 return p;
                               },
                               [](const Ellipse& e) { return ellipse_perimeter(e.a, e.b); },
                               [](const Polygon& poly) {
                                 double p = 0;
                                 const auto& v = poly.vertices;
                                 for (std::size_t i = 0; i < v.size(); ++i) p += (v[(i + 1) % v.size()] - v[i]).norm();
                                 return p;
                               },
                               [](const GraphPatch&) { return kInf; }, [](const HalfPlane&) { return kInf; },
                               [](const MaskShape& m) { return contour_length(*m.mask); },
                               [](const Reflected& r) { return r.inner->perimeter(); }},
                    v_);
}

bool Shape::empty() const {
  return std::visit(overloaded{[](const Ball& b) { return !(b.R > 0); },
                               [](const BallUnion& u) { return u.balls.empty(); },
                               [](const MaskShape& m) { return m.mask->count() == 0; },
                               [](const Reflected& r) { return r.inner->empty(); },
                               [](const auto&) { return false; }},
                    v_);
}

// ---------------------------------------------------------------------------

namespace {

Mask resample(const Mask& src, const Grid& grid, const std::function<Vec2(const Vec2&)>& pull) {
  Mask m;
  m.grid = grid;
  m.bits.resize(grid.nx, grid.ny);
  m.level.resize(grid.nx, grid.ny);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const double l = src.level_at(pull(grid.node(i, j)));
      m.level(i, j) = l;
      m.bits(i, j) = l < 0 ? 1 : 0;
    }
  return m;
}

}  // namespace

Shape reflect_set(const Shape& s, const Hyperplane& plane) {
  Shape out = std::visit(
      overloaded{
          [&](const Ball& b) -> Shape { return Ball{reflect_point(b.center, plane), b.R}; },
          [&](const BallUnion& u) -> Shape {
            BallUnion r;
            for (const Ball& b : u.balls) r.balls.push_back({reflect_point(b.center, plane), b.R});
            return r;
          },
          [&](const Ellipse& e) -> Shape {
            const Vec2 axis = reflect_vector(Vec2(std::cos(e.angle), std::sin(e.angle)), plane.e);
            return Ellipse{reflect_point(e.center, plane), e.a, e.b, std::atan2(axis.y(), axis.x())};
          },
          [&](const Polygon& p) -> Shape {
            std::vector<Vec2> v;
            for (auto it = p.vertices.rbegin(); it != p.vertices.rend(); ++it) v.push_back(reflect_point(*it, plane));
            return Polygon{std::move(v)};
          },
          [&](const HalfPlane& h) -> Shape {
            const double en = plane.e.dot(h.normal);
            return HalfPlane{reflect_vector(h.normal, plane.e), h.offset - 2 * plane.tau * en};
          },
          [&](const MaskShape& m) -> Shape {
            return resample(*m.mask, m.mask->grid, [&](const Vec2& p) { return reflect_point(p, plane); });
          },
          [&](const auto&) -> Shape { return Reflected{std::make_shared<const Shape>(s), plane}; }},
      s.variant());
  out.holder_beta = s.holder_beta;
  out.slope_bound = s.slope_bound;
  return out;
}

Shape translate_set(const Shape& s, const Vec2& t) {
  Shape out = std::visit(
      overloaded{
          [&](const Ball& b) -> Shape { return Ball{b.center + t, b.R}; },
          [&](const BallUnion& u) -> Shape {
            BallUnion r;
            for (const Ball& b : u.balls) r.balls.push_back({b.center + t, b.R});
            return r;
          },
          [&](const Ellipse& e) -> Shape { return Ellipse{e.center + t, e.a, e.b, e.angle}; },
          [&](const Polygon& p) -> Shape {
            Polygon q = p;
            for (Vec2& v : q.vertices) v += t;
            return q;
          },
          [&](const HalfPlane& h) -> Shape { return HalfPlane{h.normal, h.offset + h.normal.dot(t)}; },
          [&](const GraphPatch& g) -> Shape {
            GraphPatch q = g;
            q.x0 += t.x();
            q.x1 += t.x();
            for (double& f : q.f) f += t.y();
            return q;
          },
          [&](const MaskShape& m) -> Shape {
            Mask q = *m.mask;
            q.grid.origin += t;
            return q;
          },
          [&](const Reflected& r) -> Shape {
            // R(y - t) = R(y) - reflect(t), so the inner shape moves by reflect(t).
            return Reflected{std::make_shared<const Shape>(translate_set(*r.inner, reflect_vector(t, r.plane.e))),
                             r.plane};
          }},
      s.variant());
  out.holder_beta = s.holder_beta;
  out.slope_bound = s.slope_bound;
  return out;
}

Shape rotate_set(const Shape& s, double angle, const Vec2& c) {
  const Eigen::Matrix2d q = rotation(angle);
  auto rot = [&](const Vec2& p) -> Vec2 { return c + q * (p - c); };
  Shape out = std::visit(
      overloaded{
          [&](const Ball& b) -> Shape { return Ball{rot(b.center), b.R}; },
          [&](const BallUnion& u) -> Shape {
            BallUnion r;
            for (const Ball& b : u.balls) r.balls.push_back({rot(b.center), b.R});
            return r;
          },
          [&](const Ellipse& e) -> Shape { return Ellipse{rot(e.center), e.a, e.b, e.angle + angle}; },
          [&](const Polygon& p) -> Shape {
            Polygon r = p;
            for (Vec2& v : r.vertices) v = rot(v);
            return r;
          },
          [&](const HalfPlane& h) -> Shape {
            const Vec2 n = q * h.normal;
            return HalfPlane{n, h.offset + n.dot(c) - h.normal.dot(c)};
          },
          [&](const auto&) -> Shape {
            throw ValidationError("shape", "rotation is only supported for analytic shapes");
          }},
      s.variant());
  out.holder_beta = s.holder_beta;
  out.slope_bound = s.slope_bound;
  return out;
}

Mask rasterize(const Shape& s, const Grid& grid, double padding) {
  if (grid.nx < 1 || grid.ny < 1 || !(grid.h > 0)) throw ValidationError("grid", "empty grid");
  if (s.bounded()) {
    if (auto box = s.bbox()) {
      const Vec2 lo = grid.origin.array() + padding, hi = grid.upper().array() - padding;
      if ((box->first.array() < lo.array() - 1e-12).any() || (box->second.array() > hi.array() + 1e-12).any())
        throw ValidationError("grid", "insufficient padding: shape does not fit inside the grid");
    }
  }
  if (const auto* ms = s.as<MaskShape>()) {
    if (ms->mask->grid == grid) return *ms->mask;
    return resample(*ms->mask, grid, [](const Vec2& p) { return p; });
  }
  Mask m;
  m.grid = grid;
  m.bits.resize(grid.nx, grid.ny);
  m.level.resize(grid.nx, grid.ny);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const Vec2 p = grid.node(i, j);
      const bool in = s.inside(p);
      double l = s.level(p);
      // Keep the level sign consistent with the inside predicate.
      if (in && !(l < 0)) l = -1e-12 * grid.h;
      if (!in && l < 0) l = 0;
      m.bits(i, j) = in ? 1 : 0;
      m.level(i, j) = l;
    }
  return m;
}

Grid grid_for(const Shape& s, double h, double padding) {
  auto box = s.bbox();
  if (!box) throw ValidationError("shape", "grid_for needs a bounded, non-empty shape");
  return Grid::covering(box->first, box->second, h, padding);
}

// ---------------------------------------------------------------------------

double sym_diff_measure(const Mask& a, const Mask& b, const Window& w) {
  if (!(a.grid == b.grid)) {
    const double h = std::min(a.grid.h, b.grid.h);
    const Vec2 lo = a.grid.origin.cwiseMin(b.grid.origin);
    const Vec2 hi = a.grid.upper().cwiseMax(b.grid.upper());
    const Grid g = Grid::covering(lo, hi, h, 0);
    auto id = [](const Vec2& p) { return p; };
    return sym_diff_measure(resample(a, g, id), resample(b, g, id), w);
  }
  std::size_t n = 0;
  const double r2 = w.radius * w.radius;
  for (int j = 0; j < a.grid.ny; ++j)
    for (int i = 0; i < a.grid.nx; ++i) {
      if ((a.bits(i, j) != 0) == (b.bits(i, j) != 0)) continue;
      if (std::isfinite(w.radius) && (a.grid.node(i, j) - w.center).squaredNorm() >= r2) continue;
      ++n;
    }
  return n * a.grid.cell_measure();
}

double sym_diff_measure(const Shape& a, const Shape& b, const Grid& grid, const Window& w) {
  return sym_diff_measure(rasterize(a, grid), rasterize(b, grid), w);
}

Eigen::ArrayXXi label_components(const Mask& m, int* count) {
  const int nx = m.grid.nx, ny = m.grid.ny;
  Eigen::ArrayXXi label = Eigen::ArrayXXi::Zero(nx, ny);
  int next = 0;
  std::vector<std::pair<int, int>> stack;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      if (!m.bits(i, j) || label(i, j)) continue;
      ++next;
      label(i, j) = next;
      stack.assign(1, {i, j});
      while (!stack.empty()) {
        auto [a, b] = stack.back();
        stack.pop_back();
        const std::array<std::pair<int, int>, 4> nb{{{a + 1, b}, {a - 1, b}, {a, b + 1}, {a, b - 1}}};
        for (auto [c, d] : nb) {
          if (c < 0 || d < 0 || c >= nx || d >= ny) continue;
          if (!m.bits(c, d) || label(c, d)) continue;
          label(c, d) = next;
          stack.emplace_back(c, d);
        }
      }
    }
  if (count) *count = next;
  return label;
}

}  // namespace nlc

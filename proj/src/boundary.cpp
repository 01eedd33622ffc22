#include "nlc/geometry.hpp"
#include "nlc/quadrature.hpp"

#include <array>
#include <limits>
#include <unordered_map>

namespace nlc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

BoundarySample make_sample(const Vec2& x, const Vec2& normal, double s) {
  return BoundarySample{x, normal, perp(normal), s};
}

// Splits `count` over components proportionally to their lengths.
std::vector<int> split_count(const std::vector<double>& lengths, int count, int minimum) {
  double total = 0;
  for (double l : lengths) total += l;
  std::vector<int> out;
  for (double l : lengths) out.push_back(std::max(minimum, static_cast<int>(std::lround(count * l / total))));
  return out;
}

// Equal-arclength resampling of a polyline; normals from `normal_at` when given,
// otherwise from the segment direction (inside on the left).
BoundaryTrace resample_polyline(const std::vector<Vec2>& pts, bool closed, int count,
                                const std::function<Vec2(const Vec2&)>& normal_at = {}) {
  BoundaryTrace tr;
  tr.closed = closed;
  const std::size_t n = pts.size();
  const std::size_t segs = closed ? n : n - 1;
  std::vector<double> cum(segs + 1, 0.0);
  for (std::size_t k = 0; k < segs; ++k) cum[k + 1] = cum[k] + (pts[(k + 1) % n] - pts[k]).norm();
  tr.length = cum.back();
  std::size_t seg = 0;
  for (int k = 0; k < count; ++k) {
    const double s = closed ? tr.length * k / count : tr.length * k / std::max(count - 1, 1);
    while (seg + 1 < segs && cum[seg + 1] <= s) ++seg;
    const Vec2 a = pts[seg], b = pts[(seg + 1) % n];
    const double len = cum[seg + 1] - cum[seg];
    const double u = len > 0 ? (s - cum[seg]) / len : 0.0;
    const Vec2 x = a + u * (b - a);
    Vec2 nu;
    if (normal_at) {
      nu = normal_at(x);
    } else {
      const Vec2 t = (b - a).normalized();
      nu = Vec2(t.y(), -t.x());
    }
    tr.samples.push_back(make_sample(x, nu, s));
  }
  return tr;
}

std::vector<BoundaryTrace> sample_mask(const Mask& m, int count) {
  const auto contours = contour_loops(m);
  std::vector<double> lengths;
  for (const auto& c : contours) {
    double l = 0;
    for (std::size_t k = 0; k + 1 < c.points.size(); ++k) l += (c.points[k + 1] - c.points[k]).norm();
    if (c.closed && c.points.size() > 1) l += (c.points.front() - c.points.back()).norm();
    lengths.push_back(l);
  }
  std::vector<BoundaryTrace> out;
  if (contours.empty()) return out;
  const auto counts = split_count(lengths, count, 4);
  for (std::size_t c = 0; c < contours.size(); ++c) {
    if (contours[c].points.size() < 2) continue;
    out.push_back(resample_polyline(contours[c].points, contours[c].closed, counts[c], [&](const Vec2& x) {
      const Vec2 g = m.level_gradient(x);
      return g.norm() > 0 ? Vec2(g.normalized()) : Vec2(1, 0);
    }));
  }
  return out;
}

std::vector<BoundaryTrace> sample_ellipse(const Ellipse& e, int count) {
  // Arclength as a function of the parameter t, then inverted per sample.
  const double a = e.a, b = e.b;
  auto speed = [&](double t) { return std::hypot(a * std::sin(t), b * std::cos(t)); };
  CumulativeTable arc(speed, uniform_nodes(0, 2 * kPi, 4097), 20);
  const double L = arc.total();
  const Eigen::Matrix2d q = Eigen::Rotation2Dd(e.angle).toRotationMatrix();
  BoundaryTrace tr;
  tr.length = L;
  double t = 0;
  for (int k = 0; k < count; ++k) {
    const double s = L * k / count;
    for (int it = 0; it < 50; ++it) {
      const double dt = (arc.prefix(t) - s) / speed(t);
      t = std::clamp(t - dt, 0.0, 2 * kPi);
      if (std::abs(dt) < 1e-15) break;
    }
    const Vec2 x = e.center + q * Vec2(a * std::cos(t), b * std::sin(t));
    const Vec2 nu = (q * Vec2(std::cos(t) / a, std::sin(t) / b)).normalized();
    tr.samples.push_back(make_sample(x, nu, s));
  }
  return {tr};
}

std::vector<BoundaryTrace> sample_polygon(const Polygon& p, int count) {
  BoundaryTrace tr = resample_polyline(p.vertices, true, count);
  // A sample sitting on a vertex takes the bisector normal.
  for (auto& smp : tr.samples)
    for (const Vec2& v : p.vertices)
      if ((smp.x - v).norm() < 1e-12 * (1 + v.norm())) {
        smp.normal = Shape(p).normal(v);
        smp.tangent = perp(smp.normal);
      }
  return {tr};
}

}  // namespace

std::vector<Contour> contour_loops(const Mask& m) {
  const int nx = m.grid.nx, ny = m.grid.ny;
  const double h = m.grid.h;
  auto in = [&](int i, int j) { return m.bits(i, j) != 0; };
  auto hid = [&](int i, int j) { return 2 * (static_cast<long>(j) * nx + i); };
  auto vid = [&](int i, int j) { return 2 * (static_cast<long>(j) * nx + i) + 1; };
  auto cross_point = [&](int i0, int j0, int i1, int j1) {
    const double a = m.level(i0, j0), b = m.level(i1, j1);
    double t = 0.5;
    if ((a < 0) != (b < 0) && a != b) t = std::clamp(a / (a - b), 0.0, 1.0);
    return Vec2(m.grid.node(i0, j0) + t * (m.grid.node(i1, j1) - m.grid.node(i0, j0)));
  };
  struct Seg {
    long from, to;
    Vec2 p, q;
  };
  std::vector<Seg> segs;
  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i) {
      const std::array<bool, 4> c{in(i, j), in(i + 1, j), in(i + 1, j + 1), in(i, j + 1)};
      if (c[0] == c[1] && c[1] == c[2] && c[2] == c[3]) continue;
      const std::array<Vec2, 4> corner{m.grid.node(i, j), m.grid.node(i + 1, j), m.grid.node(i + 1, j + 1),
                                       m.grid.node(i, j + 1)};
      // Edge k joins corner k and corner k+1.
      const std::array<long, 4> eid{hid(i, j), vid(i + 1, j), hid(i, j + 1), vid(i, j)};
      auto epoint = [&](int k) {
        switch (k) {
          case 0: return cross_point(i, j, i + 1, j);
          case 1: return cross_point(i + 1, j, i + 1, j + 1);
          case 2: return cross_point(i, j + 1, i + 1, j + 1);
          default: return cross_point(i, j, i, j + 1);
        }
      };
      // Segment cutting corner k off, i.e. joining edges k-1 and k.
      auto cut = [&](int k) {
        const int ea = (k + 3) % 4, eb = k;
        Vec2 p = epoint(ea), q = epoint(eb);
        long fa = eid[ea], fb = eid[eb];
        const bool keep_left = c[k];  // inside lies on corner k's side
        const double side = cross(q - p, corner[k] - p);
        if ((side > 0) != keep_left) std::swap(p, q), std::swap(fa, fb);
        segs.push_back({fa, fb, p, q});
      };
      const int ninside = c[0] + c[1] + c[2] + c[3];
      if (ninside == 1 || ninside == 3) {
        for (int k = 0; k < 4; ++k)
          if (c[k] == (ninside == 1)) cut(k);
      } else if (c[0] == c[2]) {  // saddle
        const double centre =
            0.25 * (m.level(i, j) + m.level(i + 1, j) + m.level(i + 1, j + 1) + m.level(i, j + 1));
        const bool centre_in = centre < 0;
        for (int k = 0; k < 4; ++k)
          if (c[k] != centre_in) cut(k);
      } else {
        // Two adjacent corners inside: a single segment across the cell.
        int ea = -1, eb = -1;
        for (int k = 0; k < 4; ++k)
          if (c[k] != c[(k + 1) % 4]) (ea < 0 ? ea : eb) = k;
        Vec2 p = epoint(ea), q = epoint(eb);
        long fa = eid[ea], fb = eid[eb];
        int kin = 0;
        while (!c[kin]) ++kin;
        if (cross(q - p, corner[kin] - p) < 0) std::swap(p, q), std::swap(fa, fb);
        segs.push_back({fa, fb, p, q});
      }
    }
  std::unordered_map<long, std::size_t> by_start;
  by_start.reserve(segs.size() * 2);
  for (std::size_t k = 0; k < segs.size(); ++k) by_start[segs[k].from] = k;
  std::unordered_map<long, std::size_t> by_end;
  for (std::size_t k = 0; k < segs.size(); ++k) by_end[segs[k].to] = k;
  std::vector<char> used(segs.size(), 0);
  std::vector<Contour> out;
  auto walk = [&](std::size_t start) {
    Contour c;
    std::size_t k = start;
    c.points.push_back(segs[k].p);
    while (true) {
      used[k] = 1;
      auto it = by_start.find(segs[k].to);
      if (it == by_start.end()) {
        c.points.push_back(segs[k].q);
        c.closed = false;
        break;
      }
      if (it->second == start) break;
      if (used[it->second]) {
        c.closed = false;
        break;
      }
      k = it->second;
      c.points.push_back(segs[k].p);
    }
    out.push_back(std::move(c));
  };
  // Open chains first, from their free ends.
  for (std::size_t k = 0; k < segs.size(); ++k)
    if (!used[k] && !by_end.count(segs[k].from)) walk(k);
  for (std::size_t k = 0; k < segs.size(); ++k)
    if (!used[k]) walk(k);
  (void)h;
  return out;
}

double contour_length(const Mask& m) {
  double l = 0;
  for (const auto& c : contour_loops(m)) {
    for (std::size_t k = 0; k + 1 < c.points.size(); ++k) l += (c.points[k + 1] - c.points[k]).norm();
    if (c.closed && c.points.size() > 1) l += (c.points.front() - c.points.back()).norm();
  }
  return l;
}

std::vector<BoundaryTrace> boundary_samples(const Shape& s, int count, const SampleOptions& opt) {
  if (count < 1) throw ValidationError("count", "need at least one sample");
  return std::visit(
      overloaded{
          [&](const Ball& b) -> std::vector<BoundaryTrace> {
            BoundaryTrace tr;
            tr.length = 2 * kPi * b.R;
            for (int k = 0; k < count; ++k) {
              const double t = 2 * kPi * k / count;
              const Vec2 nu(std::cos(t), std::sin(t));
              tr.samples.push_back(make_sample(b.center + b.R * nu, nu, b.R * t));
            }
            return {tr};
          },
          [&](const BallUnion& u) -> std::vector<BoundaryTrace> {
            if (u.balls.empty()) return {};
            const Eigen::MatrixXd g = gaps(u);
            bool disjoint = true;
            for (int i = 0; i < g.rows(); ++i)
              for (int j = 0; j < g.cols(); ++j)
                if (i != j && g(i, j) <= 0) disjoint = false;
            if (!disjoint) {
              double rmin = std::numeric_limits<double>::infinity();
              for (const Ball& b : u.balls) rmin = std::min(rmin, b.R);
              return sample_mask(rasterize(s, grid_for(s, rmin / 256, 4 * rmin / 256)), count);
            }
            std::vector<double> lengths;
            for (const Ball& b : u.balls) lengths.push_back(b.R);
            const auto counts = split_count(lengths, count, 4);
            std::vector<BoundaryTrace> out;
            for (std::size_t k = 0; k < u.balls.size(); ++k) {
              auto t = boundary_samples(Shape(u.balls[k]), counts[k]);
              out.push_back(std::move(t.front()));
            }
            return out;
          },
          [&](const Ellipse& e) { return sample_ellipse(e, count); },
          [&](const Polygon& p) { return sample_polygon(p, count); },
          [&](const GraphPatch& g) -> std::vector<BoundaryTrace> {
            const double cx = opt.focus ? opt.focus->x() : 0.0;
            const double a = cx - opt.half_length, b = cx + opt.half_length;
            std::vector<Vec2> pts;
            pts.emplace_back(a, g.value(a));
            const int n = static_cast<int>(g.f.size());
            const double dx = (g.x1 - g.x0) / (n - 1);
            for (int k = 0; k < n; ++k) {
              const double x = g.x0 + k * dx;
              if (x > a && x < b) pts.emplace_back(x, g.f[k]);
            }
            pts.emplace_back(b, g.value(b));
            // Subgraph: the inside lies below, so walking in +x keeps it on the right; reverse.
            std::reverse(pts.begin(), pts.end());
            BoundaryTrace tr = resample_polyline(pts, false, count);
            return {tr};
          },
          [&](const HalfPlane& hp) -> std::vector<BoundaryTrace> {
            const Vec2 n = hp.normal.normalized();
            const Vec2 foot = opt.focus ? Vec2(*opt.focus - (opt.focus->dot(n) - hp.offset) * n)
                                        : Vec2(hp.offset * n);
            const Vec2 t = perp(n);
            std::vector<Vec2> pts{foot - opt.half_length * t, foot + opt.half_length * t};
            return {resample_polyline(pts, false, count)};
          },
          [&](const MaskShape& ms) { return sample_mask(*ms.mask, count); },
          [&](const Reflected& r) -> std::vector<BoundaryTrace> {
            SampleOptions inner = opt;
            if (opt.focus) inner.focus = reflect_point(*opt.focus, r.plane);
            auto traces = boundary_samples(*r.inner, count, inner);
            for (auto& tr : traces) {
              std::reverse(tr.samples.begin(), tr.samples.end());
              for (auto& smp : tr.samples) {
                smp.x = reflect_point(smp.x, r.plane);
                smp.normal = reflect_vector(smp.normal, r.plane.e);
                smp.tangent = perp(smp.normal);
              }
              double s = 0;
              for (std::size_t k = 0; k < tr.samples.size(); ++k) {
                if (k) s += (tr.samples[k].x - tr.samples[k - 1].x).norm();
                tr.samples[k].s = s;
              }
            }
            return traces;
          }},
      s.variant());
}

GraphSlope local_graph_slope(const Shape& s, const Vec2& x, double radius) {
  if (!(radius > 0)) throw ValidationError("radius", "radius must be positive");
  std::vector<BoundaryTrace> traces;
  if (s.bounded()) {
    const double per = s.perimeter();
    const int count = static_cast<int>(std::clamp(per / (radius / 400), 64.0, double(1 << 20)));
    traces = boundary_samples(s, count);
  } else {
    SampleOptions o;
    o.focus = x;
    o.half_length = 4 * radius;
    traces = boundary_samples(s, 3201, o);
  }
  const Vec2 nu = s.normal(x);
  const Vec2 tan = perp(nu);
  const double r2 = radius * radius;
  // Locate the sample nearest to x.
  std::size_t best_t = 0, best_k = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < traces.size(); ++t)
    for (std::size_t k = 0; k < traces[t].samples.size(); ++k) {
      const double d = (traces[t].samples[k].x - x).squaredNorm();
      if (d < best) best = d, best_t = t, best_k = k;
    }
  if (!std::isfinite(best)) return {false, 0, "no boundary"};
  const auto& tr = traces[best_t];
  const long n = static_cast<long>(tr.samples.size());
  auto inball = [&](long k) { return (tr.samples[k].x - x).squaredNorm() < r2; };
  auto wrap = [&](long k) { return tr.closed ? ((k % n) + n) % n : k; };
  long lo = best_k, hi = best_k;
  while (true) {
    const long k = lo - 1;
    if (!tr.closed && k < 0) break;
    if (hi - (lo - 1) + 1 > n) return {false, 0, "boundary component lies inside the ball"};
    if (!inball(wrap(k))) break;
    --lo;
  }
  while (true) {
    const long k = hi + 1;
    if (!tr.closed && k >= n) break;
    if ((hi + 1) - lo + 1 > n) return {false, 0, "boundary component lies inside the ball"};
    if (!inball(wrap(k))) break;
    ++hi;
  }
  // Any other boundary piece inside the ball breaks the graph property.
  for (std::size_t t = 0; t < traces.size(); ++t)
    for (long k = 0; k < static_cast<long>(traces[t].samples.size()); ++k) {
      if ((traces[t].samples[k].x - x).squaredNorm() >= r2) continue;
      if (t == best_t) {
        const long rel = tr.closed ? ((k - lo) % n + n) % n : k - lo;
        if (rel >= 0 && rel <= hi - lo) continue;
      }
      return {false, 0, "a second boundary piece meets the ball"};
    }
  double slope = 0;
  double prev_s = 0, prev_f = 0;
  for (long k = lo; k <= hi; ++k) {
    const Vec2 d = tr.samples[wrap(k)].x - x;
    const double ss = d.dot(tan), ff = d.dot(nu);
    if (k > lo) {
      const double ds = ss - prev_s;
      if (!(ds > 0)) return {false, 0, "vertical-line test fails in the tangent frame"};
      slope = std::max(slope, std::abs(ff - prev_f) / ds);
    }
    prev_s = ss;
    prev_f = ff;
  }
  return {true, slope, ""};
}

}  // namespace nlc

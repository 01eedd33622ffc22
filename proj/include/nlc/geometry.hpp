#pragma once

#include "nlc/core.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace nlc {

// pi_tau = {x : x.e = tau}.
struct Hyperplane {
  Vec2 e{1, 0};
  double tau = 0;
};

template <typename Scalar>
Vector2<Scalar> reflect_point(const Vector2<Scalar>& x, const Hyperplane& p) {
  const Vector2<Scalar> e = p.e.cast<Scalar>();
  return x - Scalar(2) * (x.dot(e) - Scalar(p.tau)) * e;
}

inline Vec2 reflect_vector(const Vec2& v, const Vec2& e) { return v - 2 * v.dot(e) * e; }

// Area of the intersection of two disks of radii R and r whose centres are d apart.
template <typename Scalar>
Scalar lens_area(Scalar R, Scalar r, Scalar d) {
  using std::acos;
  using std::sqrt;
  using std::abs;
  const Scalar pi = Scalar(kPi);
  if (d >= R + r) return Scalar(0);
  if (d <= abs(R - r)) {
    const Scalar m = R < r ? R : r;
    return pi * m * m;
  }
  const Scalar c1 = (d * d + r * r - R * R) / (2 * d * r);
  const Scalar c2 = (d * d + R * R - r * r) / (2 * d * R);
  const Scalar k = (-d + r + R) * (d + r - R) * (d - r + R) * (d + r + R);
  return r * r * acos(c1) + R * R * acos(c2) - Scalar(0.5) * sqrt(k > 0 ? k : Scalar(0));
}

// ---------------------------------------------------------------------------
// Grids and masks

// Nodes origin + h (i, j), i in [0, nx), j in [0, ny).
struct Grid {
  Vec2 origin{0, 0};
  double h = 1;
  int nx = 0, ny = 0;

  Vec2 node(int i, int j) const { return origin + h * Vec2(i, j); }
  Vec2 upper() const { return node(nx - 1, ny - 1); }
  double cell_measure() const { return h * h; }
  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
  bool operator==(const Grid&) const = default;

  // Lattice-aligned (nodes at integer multiples of h) grid covering [lo, hi] plus padding.
  static Grid covering(const Vec2& lo, const Vec2& hi, double h, double padding);
};

// Bits are stored (i, j) = (x index, y index); x is the fast direction.
using Bits = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// Node-sampled set with a signed, distance-like level field (negative inside).
struct Mask {
  Grid grid;
  Bits bits;
  Eigen::ArrayXXd level;

  bool bit(int i, int j) const {
    return i >= 0 && j >= 0 && i < grid.nx && j < grid.ny && bits(i, j) != 0;
  }
  // Nearest-node membership; points off the grid are outside.
  bool inside(const Vec2& p) const;
  // Bilinear level; grows like the distance to the grid off the grid.
  double level_at(const Vec2& p) const;
  Vec2 level_gradient(const Vec2& p) const;
  std::size_t count() const;
  double area() const { return static_cast<double>(count()) * grid.cell_measure(); }
};

// Mask from bits alone; the level field comes from a Euclidean distance transform.
Mask make_mask(const Grid& grid, Bits bits);
// Signed distance of the node-centre set (Felzenszwalb-Huttenlocher transform).
Eigen::ArrayXXd signed_distance(const Grid& grid, const Bits& bits);

// ---------------------------------------------------------------------------
// Shapes

struct Ball {
  Vec2 center{0, 0};
  double R = 1;
};

struct BallUnion {
  std::vector<Ball> balls;
};

// Axis a along angle `angle`, axis b perpendicular.
struct Ellipse {
  Vec2 center{0, 0};
  double a = 1, b = 1;
  double angle = 0;
};

// Simple, counter-clockwise.
struct Polygon {
  std::vector<Vec2> vertices;
};

// Subgraph {y < f(x)}; f piecewise linear through equispaced samples on [x0, x1],
// constant beyond the window.
struct GraphPatch {
  double x0 = -1, x1 = 1;
  std::vector<double> f;

  double value(double x) const;
  double slope(double x) const;
};

// {x : x.normal < offset}.
struct HalfPlane {
  Vec2 normal{1, 0};
  double offset = 0;
};

struct MaskShape {
  std::shared_ptr<const Mask> mask;
};

class Shape;

// Mirror image of another shape, for variants whose reflection has no closed parameter form.
struct Reflected {
  std::shared_ptr<const Shape> inner;
  Hyperplane plane;
};

class Shape {
 public:
  using Variant = std::variant<Ball, BallUnion, Ellipse, Polygon, GraphPatch, HalfPlane, MaskShape, Reflected>;

  Shape() : v_(BallUnion{}) {}
  Shape(Ball b) : v_(b) {}
  Shape(BallUnion u) : v_(std::move(u)) {}
  Shape(Ellipse e) : v_(e) {}
  Shape(Polygon p) : v_(std::move(p)) {}
  Shape(GraphPatch g) : v_(std::move(g)) {}
  Shape(HalfPlane h) : v_(h) {}
  Shape(Mask m) : v_(MaskShape{std::make_shared<const Mask>(std::move(m))}) {}
  Shape(MaskShape m) : v_(std::move(m)) {}
  Shape(Reflected r) : v_(std::move(r)) {}

  const Variant& variant() const { return v_; }
  template <class T>
  const T* as() const { return std::get_if<T>(&v_); }
  std::string kind() const;

  bool inside(const Vec2& p) const;
  // Negative inside, positive outside, distance-like near the boundary.
  double level(const Vec2& p) const;
  // Outward unit normal at (or near) a boundary point.
  Vec2 normal(const Vec2& p) const;
  // Appends every t in (0, tmax) where o + t d may cross the boundary; |d| = 1. Extra
  // candidates are harmless, the caller classifies the pieces between them.
  void crossings(const Vec2& o, const Vec2& d, double tmax, std::vector<double>& out) const;

  bool bounded() const;
  // Lower and upper corners of a bounding box for bounded shapes.
  std::optional<std::pair<Vec2, Vec2>> bbox() const;
  double area() const;
  double perimeter() const;
  bool empty() const;

  double holder_beta = 1.0;
  double slope_bound = 0.0;

 private:
  Variant v_;
};

Polygon make_polygon(std::vector<Vec2> vertices);
GraphPatch make_graph_patch(double x0, double x1, std::vector<double> f, double slope_bound);
// A square of side `side` centred at `center` whose corners are rounded with radius `radius`.
Polygon rounded_square(const Vec2& center, double side, double radius, int arc_points = 32);
// Star-shaped polygon with radius R0 (1 + sum a_k cos(k theta + phase_k)).
Polygon star_polygon(const Vec2& center, double R0, const std::vector<double>& amplitudes,
                     const std::vector<double>& phases, int points);

// Pairwise boundary gaps |c_i - c_j| - R_i - R_j.
Eigen::MatrixXd gaps(const BallUnion& u);

Shape reflect_set(const Shape& s, const Hyperplane& plane);
Shape translate_set(const Shape& s, const Vec2& v);
Shape rotate_set(const Shape& s, double angle, const Vec2& center = Vec2::Zero());

// Node-centre sampling. Bounded shapes must fit with `padding` to spare.
Mask rasterize(const Shape& s, const Grid& grid, double padding = 0);
// Grid fitted to the shape's bounding box.
Grid grid_for(const Shape& s, double h, double padding);

// ---------------------------------------------------------------------------
// Ray intervals

template <class R>
concept Region = requires(const R& r, const Vec2& p, double t, std::vector<double>& out) {
  { r.inside(p) } -> std::convertible_to<bool>;
  r.crossings(p, p, t, out);
};

template <Region A>
struct Complement {
  const A& a;
  bool inside(const Vec2& p) const { return !a.inside(p); }
  void crossings(const Vec2& o, const Vec2& d, double tmax, std::vector<double>& out) const {
    a.crossings(o, d, tmax, out);
  }
};

template <Region A, Region B>
struct Difference {
  const A& a;
  const B& b;
  bool inside(const Vec2& p) const { return a.inside(p) && !b.inside(p); }
  void crossings(const Vec2& o, const Vec2& d, double tmax, std::vector<double>& out) const {
    a.crossings(o, d, tmax, out);
    b.crossings(o, d, tmax, out);
  }
};

// Region given by a shape seen through a reflection: y is inside iff R(y) is.
template <Region A>
struct Mirrored {
  const A& a;
  Hyperplane plane;
  bool inside(const Vec2& p) const { return a.inside(reflect_point(p, plane)); }
  void crossings(const Vec2& o, const Vec2& d, double tmax, std::vector<double>& out) const {
    a.crossings(reflect_point(o, plane), reflect_vector(d, plane.e), tmax, out);
  }
};

using Interval = std::pair<double, double>;

// Maximal sub-intervals of [0, tmax] along o + t d that lie in the region.
template <Region R>
void ray_intervals(const R& region, const Vec2& o, const Vec2& d, double tmax,
                   std::vector<double>& scratch, std::vector<Interval>& out) {
  scratch.clear();
  out.clear();
  region.crossings(o, d, tmax, scratch);
  scratch.push_back(0.0);
  scratch.push_back(tmax);
  std::sort(scratch.begin(), scratch.end());
  double prev = 0;
  for (std::size_t k = 1; k < scratch.size(); ++k) {
    const double t = std::min(std::max(scratch[k], 0.0), tmax);
    const double tiny = 1e-13 * std::max(1.0, t);
    if (t - prev <= tiny) continue;
    if (region.inside(o + (0.5 * (prev + t)) * d)) {
      if (!out.empty() && prev - out.back().second <= tiny)
        out.back().second = t;
      else
        out.emplace_back(prev, t);
    }
    prev = t;
  }
}

// ---------------------------------------------------------------------------
// Boundary traces

struct BoundarySample {
  Vec2 x;
  Vec2 normal;   // outward
  Vec2 tangent;  // counter-clockwise for outer boundaries: perp(normal)
  double s = 0;  // arclength from the trace start
};

struct BoundaryTrace {
  std::vector<BoundarySample> samples;
  bool closed = true;
  double length = 0;
};

struct SampleOptions {
  // Unbounded shapes are sampled on a window of this half-length around `focus`
  // (default: the boundary point closest to the origin).
  std::optional<Vec2> focus;
  double half_length = 1.0;
};

// Equispaced in arclength; one trace per boundary component. `count` is the total,
// split across components by length.
std::vector<BoundaryTrace> boundary_samples(const Shape& s, int count, const SampleOptions& opt = {});
struct Contour {
  std::vector<Vec2> points;
  bool closed = true;  // open chains run into the grid border
};
// Marching squares on the mask's level field; contours keep the inside on their left.
std::vector<Contour> contour_loops(const Mask& m);
double contour_length(const Mask& m);

// ---------------------------------------------------------------------------
// Symmetric differences

struct Window {
  Vec2 center{0, 0};
  double radius = std::numeric_limits<double>::infinity();
};

double sym_diff_measure(const Mask& a, const Mask& b, const Window& w = {});
// Both shapes are rasterised on `grid`.
double sym_diff_measure(const Shape& a, const Shape& b, const Grid& grid, const Window& w = {});
// |M Δ R(M)| ∩ w, with R(M) resampled through the level field.
double reflected_sym_diff(const Mask& m, const Hyperplane& plane, const Window& w = {});

// Local graph diagnostic in the tangent frame at x.
struct GraphSlope {
  bool is_graph = false;
  double slope = 0;
  std::string reason;
};
GraphSlope local_graph_slope(const Shape& s, const Vec2& x, double radius);

// ---------------------------------------------------------------------------
// Critical hyperplanes

enum class Contact { interior_touching, non_transversal, both };
std::string to_string(Contact c);

struct CriticalOptions {
  double slack = -1;        // containment slack; < 0 means one cell, h
  double kappa = 3;         // discrete "measure zero" is |.| <= kappa h perimeter
  double on_plane_tol = -1; // < 0 means 2h
  double angle_tol = 1e-3;  // nu is perpendicular to e when |nu.e| <= angle_tol (after
                            // allowing for the grid resolution)
};

struct CriticalPlane {
  double lambda = 0;
  double mu = 0;  // sup x.e
  Contact contact = Contact::both;
  Vec2 x0{0, 0};
  double reflected_sym_diff = 0;
  int bisection_steps = 0;
};

CriticalPlane critical_lambda(const Mask& m, const Vec2& e, const CriticalOptions& opt = {});
CriticalPlane critical_lambda(const Shape& s, const Vec2& e, double h, const CriticalOptions& opt = {});

// Whether R_tau(M ∩ {x.e > tau}) ⊆ M up to the slack.
bool reflected_cap_contained(const Mask& m, const Vec2& e, double tau, double slack);

// Connected components (4-neighbour) of the set bits; labels start at 1, 0 is outside.
Eigen::ArrayXXi label_components(const Mask& m, int* count = nullptr);

}  // namespace nlc

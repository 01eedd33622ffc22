#pragma once

#include "nlc/curvature.hpp"
#include "nlc/geometry.hpp"
#include "nlc/kernels.hpp"

#include <string>
#include <utility>
#include <vector>

namespace nlc {

struct Constancy {
  bool is_constant = false;
  double mean = 0;
  double max_dev = 0;
  double l1 = 0;
  double tol = 0;     // relative to ||J||_1
  std::size_t worst = 0;  // sample index of the largest deviation
};

// Constant iff max |H - mean| <= tol ||J||_1. Needs at least 64 samples.
Constancy constancy_check(const BoundaryCurvature& bc, double tol = 1e-3);

// One plane of the sweep: the critical plane of the components still unresolved, and the
// group of components tied to its contact point through the influence graph.
struct PlaneStage {
  CriticalPlane plane;
  std::vector<int> group;  // component ids, 0-based
  double sym_diff = 0;     // |G Δ R(G)| for the group G
  bool symmetric = false;
};

struct MovingPlaneOptions {
  double h = -1;  // < 0: component radius / 128
  double kappa = 3;
  int max_iterations = 8;
};

struct MovingPlaneReport {
  Vec2 e{1, 0};
  double h = 0;
  double perimeter = 0;
  // First stage: the plane for the whole set.
  double lambda = 0;
  Contact contact = Contact::both;
  Vec2 x0{0, 0};
  double windowed_sym_diff = 0;  // |Omega Δ R(Omega)| ∩ B_r(x0)
  double sym_diff = 0;           // over the whole plane
  // Propagation chain from x0 along the lower boundary.
  std::vector<Vec2> chain;
  double min_separation = 0;
  bool chain_covers = false;
  int components = 0;
  std::vector<bool> component_symmetric;
  std::vector<std::pair<int, int>> influence;  // boundary gap < r
  std::vector<PlaneStage> stages;
  bool inconclusive = false;  // components left after max_iterations stages
  bool passes() const;
};

MovingPlaneReport moving_plane_run(const Shape& s, const KernelSpec& k, const Vec2& e,
                                   const MovingPlaneOptions& opt = {});

enum class VerdictKind { Ball, UnionOfBalls, NotConstant, Inconclusive };
std::string to_string(VerdictKind v);

struct FittedBall {
  Vec2 center{0, 0};
  double R = 0;
  double residual = 0;  // rms of |x - c| - R
};

// Algebraic least-squares circle through the points.
FittedBall fit_circle(const std::vector<Vec2>& pts);

struct ShapeVerdict {
  VerdictKind kind = VerdictKind::Inconclusive;
  std::vector<FittedBall> balls;
  double min_gap = 0;
  double max_deviation = 0;
  Constancy constancy;
  std::vector<MovingPlaneReport> directions;
  double tol = 0;
  double tol_geom = 0;
  std::string reason;
};

struct ClassifyOptions {
  int samples = 256;
  MovingPlaneOptions plane;
  QuadratureOptions quadrature;
};

ShapeVerdict classify(const Shape& s, const KernelSpec& k, int directions = 8, double tol = 1e-3,
                      const ClassifyOptions& opt = {});

// min over sampled boundary pairs |x1 - x2| > 2h of |Omega ∩ (B_r(x1) Δ B_r(x2))| / |x1 - x2|,
// with Omega counted on a lattice of spacing h (h <= 0: min(r, diameter) / 128).
double nondegeneracy_quotient(const Shape& s, double r, int samples, double h = 0);

}  // namespace nlc

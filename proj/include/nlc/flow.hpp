#pragma once

#include "nlc/convolution.hpp"
#include "nlc/geometry.hpp"
#include "nlc/kernels.hpp"

#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace nlc {

// Gaussian heat kernel at time dt.
struct HeatVariant {
  double dt = 1e-3;
};

// Threshold J * chi >= ||J||_1 / 2, i.e. the set {H <= 0}. `dt` only labels the time axis.
struct NonlocalVariant {
  KernelSpec kernel;
  double dt = 1.0;
};

using FlowVariant = std::variant<HeatVariant, NonlocalVariant>;

struct FlowDiagnostics {
  double area = 0;
  double perimeter = 0;
  Vec2 centroid{0, 0};
};

// The node mask is the threshold set; `fraction` holds the area fraction of each node's cell
// inside the reconstructed front, and is what the next step convolves.
struct FlowState {
  int k = 0;
  double t = 0;
  Mask mask;
  Eigen::ArrayXXd fraction;
  FlowDiagnostics diag;
};

struct FlowOptions {
  // replicate suits sets that run off the grid (half-planes, everything).
  Extension extension = Extension::zero;
};

FlowDiagnostics diagnostics(const Mask& m);
FlowDiagnostics diagnostics(const Mask& m, const Eigen::ArrayXXd& fraction);

// Fraction of each cell where f >= iso, from the local linear reconstruction of f.
Eigen::ArrayXXd cell_fractions(const Eigen::ArrayXXd& f, double iso, double h);
// Area of {p : p.n <= s} within the unit square centred at 0, |n| = 1.
double square_cut_fraction(double nx, double ny, double s);
FlowState initial_state(const Shape& s, const Grid& grid);
FlowState initial_state(Mask m);

// Holds the stencil between steps.
class FlowStepper {
 public:
  FlowStepper(const Grid& grid, const FlowVariant& v, const FlowOptions& opt = {});
  ~FlowStepper();
  FlowStepper(FlowStepper&&) noexcept;
  FlowStepper& operator=(FlowStepper&&) noexcept;

  FlowState step(const FlowState& s) const;
  double dt() const;
  int half_width() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

FlowState mbo_step(const FlowState& s, const FlowVariant& v, const FlowOptions& opt = {});

struct FlowRecord {
  int k = 0;
  double t = 0;
  FlowDiagnostics diag;
};

struct FlowRun {
  std::vector<FlowRecord> series;  // includes the initial state
  std::string stop = "steps";      // steps | extinction | fixed_point
  Mask final_mask;
  std::vector<Mask> masks;         // per step when requested
};

struct FlowRunOptions {
  FlowOptions step;
  bool keep_masks = false;
};

FlowRun flow_run(const FlowState& initial, const FlowVariant& v, int steps, const FlowRunOptions& opt = {});
FlowRun flow_run(const Shape& initial, const Grid& grid, const FlowVariant& v, int steps,
                 const FlowRunOptions& opt = {});

}  // namespace nlc

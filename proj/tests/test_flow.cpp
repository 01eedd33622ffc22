#include "nlc/flow.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace nlc;

TEST(Flow, SquareCutFraction) {
  EXPECT_NEAR(square_cut_fraction(1, 0, 0), 0.5, 1e-15);
  EXPECT_NEAR(square_cut_fraction(1, 0, 0.25), 0.75, 1e-15);
  EXPECT_NEAR(square_cut_fraction(1, 0, 1), 1.0, 1e-15);
  const double c = std::sqrt(0.5);
  EXPECT_NEAR(square_cut_fraction(c, c, 0), 0.5, 1e-15);
  // Corner triangle: p.n <= s cuts legs of length (s + c) / c from the (-1/2, -1/2) corner.
  const double s = -0.5;
  const double leg = (s + c) / c;
  EXPECT_NEAR(square_cut_fraction(c, c, s), 0.5 * leg * leg, 1e-14);
  EXPECT_NEAR(square_cut_fraction(0.6, 0.8, 0.1) + square_cut_fraction(-0.6, -0.8, -0.1), 1.0, 1e-14);
}

TEST(Flow, StepTooSmallForGrid) {
  const Shape b(Ball{Vec2(0, 0), 1});
  const Grid g = grid_for(b, 1.0 / 512, 0.3);
  // sqrt(2 dt) < 2h.
  EXPECT_THROW(FlowStepper(g, HeatVariant{1e-6}), ValidationError);
}

TEST(Flow, DiskShrinksAtEveryStep) {
  const Shape b(Ball{Vec2(0, 0), 0.5});
  const Grid g = grid_for(b, 1.0 / 128, 0.4);
  const FlowRun run = flow_run(b, g, HeatVariant{1e-3}, 40);
  ASSERT_EQ(run.series.size(), 41u);
  for (std::size_t i = 1; i < run.series.size(); ++i)
    EXPECT_LT(run.series[i].diag.area, run.series[i - 1].diag.area);
  // dA/dt = -2 pi.
  const double rate = (run.series.back().diag.area - run.series.front().diag.area) / run.series.back().t;
  EXPECT_NEAR(rate, -2 * kPi, 0.1 * 2 * kPi);
  EXPECT_NEAR(run.series.back().diag.centroid.norm(), 0.0, 1e-3);
}

TEST(Flow, HalfPlaneAndEverythingAreFixedPoints) {
  FlowRunOptions o;
  o.step.extension = Extension::replicate;
  const Grid g{Vec2(-1, -1), 1.0 / 64, 129, 129};
  for (const Shape& s : {Shape(HalfPlane{Vec2(1, 0), 0.0}), Shape(HalfPlane{Vec2(0, 1), 0.3})}) {
    const FlowState st = initial_state(s, g);
    const FlowState next = mbo_step(st, HeatVariant{1e-3}, o.step);
    const long diff = (next.mask.bits.cast<int>() - st.mask.bits.cast<int>()).abs().sum();
    // Up to one cell layer.
    EXPECT_LE(diff, g.ny);
    const FlowRun run = flow_run(st, HeatVariant{1e-3}, 5, o);
    EXPECT_EQ(run.stop, "fixed_point");
  }
  Bits all = Bits::Ones(g.nx, g.ny);
  const FlowState full = initial_state(make_mask(g, all));
  const FlowState next = mbo_step(full, HeatVariant{1e-3}, o.step);
  EXPECT_EQ(next.mask.bits.cast<int>().sum(), int(g.size()));
}

TEST(Flow, ComparisonPrinciple) {
  const Grid g{Vec2(-1.5, -1.5), 1.0 / 128, 385, 385};
  for (const FlowVariant& v : {FlowVariant(HeatVariant{1e-3}),
                               FlowVariant(NonlocalVariant{{KernelFamily::smooth_compact, 2, 0.2, 1, 1, 1}, 1.0})}) {
    FlowState a = initial_state(Shape(Ball{Vec2(0.05, 0), 0.6}), g);
    FlowState b = initial_state(Shape(Ball{Vec2(0, 0), 0.8}), g);
    const FlowStepper step(g, v);
    for (int k = 0; k < 10; ++k) {
      a = step.step(a);
      b = step.step(b);
      EXPECT_EQ(((a.mask.bits > 0) && (b.mask.bits == 0)).count(), 0) << "step " << k;
    }
  }
}

TEST(Flow, LatticeTranslationEquivariance) {
  const Grid g{Vec2(-1, -1), 1.0 / 64, 129, 129};
  const Shape e(Ellipse{Vec2(-0.1, 0), 0.5, 0.3, 0.4});
  const Shape t = translate_set(e, Vec2(5.0 / 64, -3.0 / 64));
  const FlowStepper step(g, HeatVariant{2e-3});
  const FlowState a = step.step(initial_state(e, g));
  const FlowState b = step.step(initial_state(t, g));
  for (int i = 0; i + 5 < g.nx; ++i)
    for (int j = 3; j < g.ny; ++j) EXPECT_EQ(a.mask.bits(i, j), b.mask.bits(i + 5, j - 3));
}

TEST(Flow, SeparatedDisksEvolveIndependently) {
  const Grid g{Vec2(-1, -1), 1.0 / 64, 257, 129};
  const Shape one(Ball{Vec2(-0.3, 0), 0.4});
  const Shape two(BallUnion{{Ball{Vec2(-0.3, 0), 0.4}, Ball{Vec2(2.3, 0), 0.4}}});
  const FlowRun a = flow_run(one, g, HeatVariant{1e-3}, 20);
  const FlowRun b = flow_run(two, g, HeatVariant{1e-3}, 20);
  for (int i = 0; i < 128; ++i)
    for (int j = 0; j < g.ny; ++j) EXPECT_EQ(a.final_mask.bits(i, j), b.final_mask.bits(i, j));
}

TEST(Flow, NonlocalFixedPointForHalfPlane) {
  FlowOptions o;
  o.extension = Extension::replicate;
  const Grid g{Vec2(-1, -1), 1.0 / 64, 129, 129};
  const FlowState st = initial_state(Shape(HalfPlane{Vec2(1, 0), 0.0}), g);
  const FlowState next = mbo_step(st, NonlocalVariant{{KernelFamily::indicator, 2, 0.25, 1, 1, 1}, 1.0}, o);
  const long diff = (next.mask.bits.cast<int>() - st.mask.bits.cast<int>()).abs().sum();
  EXPECT_LE(diff, g.ny);
}

TEST(Flow, Extinction) {
  const Shape b(Ball{Vec2(0, 0), 0.1});
  const FlowRun run = flow_run(b, grid_for(b, 1.0 / 256, 0.3), HeatVariant{1e-3}, 100);
  EXPECT_EQ(run.stop, "extinction");
  EXPECT_NEAR(run.series.back().t, 0.005, 0.002);
}

#include "nlc/alexandrov.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace nlc;

namespace {
KernelSpec indicator(double r) { return {KernelFamily::indicator, 2, r, 1, 1, 1}; }
KernelSpec smooth(double r) { return {KernelFamily::smooth_compact, 2, r, 1, 1, 1}; }
}  // namespace

TEST(FitCircle, RecoversNoisyCircle) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> N(0, 1e-4);
  std::vector<Vec2> pts;
  for (int i = 0; i < 100; ++i) {
    const double t = 2 * kPi * i / 100;
    pts.push_back(Vec2(0.3, -1.2) + (2.5 + N(rng)) * Vec2(std::cos(t), std::sin(t)));
  }
  const FittedBall b = fit_circle(pts);
  EXPECT_NEAR(b.center.x(), 0.3, 1e-4);
  EXPECT_NEAR(b.center.y(), -1.2, 1e-4);
  EXPECT_NEAR(b.R, 2.5, 1e-4);
  EXPECT_LT(b.residual, 3e-4);
  EXPECT_THROW(fit_circle({Vec2(0, 0), Vec2(1, 0)}), ValidationError);
}

TEST(Constancy, BallIsConstantEllipseIsNot) {
  const KernelSpec k = smooth(0.5);
  const BoundaryCurvature ball = boundary_curvature(Shape(Ball{Vec2(0.1, 0.2), 1}), k, 128);
  const Constancy c = constancy_check(ball);
  EXPECT_TRUE(c.is_constant);
  EXPECT_LT(c.max_dev, 1e-5 * l1_norm(k));
  const BoundaryCurvature el = boundary_curvature(Shape(Ellipse{Vec2(0, 0), 2, 1, 0}), k, 128);
  EXPECT_FALSE(constancy_check(el).is_constant);
  const BoundaryCurvature few = boundary_curvature(Shape(Ball{Vec2(0, 0), 1}), k, 16);
  EXPECT_THROW(constancy_check(few), ValidationError);
}

TEST(MovingPlane, BallIsSymmetricInEveryDirection) {
  const Shape b(Ball{Vec2(0.2, 0.1), 1});
  for (double th : {0.0, 0.7, 2.0}) {
    const MovingPlaneReport r = moving_plane_run(b, indicator(0.5), Vec2(std::cos(th), std::sin(th)));
    EXPECT_TRUE(r.passes());
    EXPECT_NEAR(r.lambda, Vec2(0.2, 0.1).dot(Vec2(std::cos(th), std::sin(th))), 3 * r.h);
    EXPECT_EQ(r.components, 1);
    EXPECT_FALSE(r.inconclusive);
    EXPECT_LE(r.sym_diff, 3 * r.h * r.perimeter);
    EXPECT_TRUE(r.chain_covers);
    EXPECT_GE(r.min_separation, 0.25 - 2 * r.h);
    EXPECT_LE(r.chain.size(), std::size_t(r.perimeter / 0.25) + 1);
  }
}

TEST(MovingPlane, ObliqueEllipseFails) {
  const Shape e(Ellipse{Vec2(0, 0), 2, 1, 0});
  const MovingPlaneReport r = moving_plane_run(e, indicator(0.5), Vec2(std::cos(0.6), std::sin(0.6)));
  EXPECT_FALSE(r.passes());
  EXPECT_GT(r.sym_diff, 3 * r.h * r.perimeter);
}

TEST(MovingPlane, FarApartBallsAreSeparateGroups) {
  const Shape u(BallUnion{{Ball{Vec2(0, 0), 1}, Ball{Vec2(4, 0.5), 0.7}}});
  const MovingPlaneReport r = moving_plane_run(u, indicator(0.5), Vec2(1, 0));
  EXPECT_EQ(r.components, 2);
  EXPECT_TRUE(r.influence.empty());
  EXPECT_EQ(r.stages.size(), 2u);
  EXPECT_TRUE(r.passes());
}

TEST(Classify, BallAndEllipse) {
  const ShapeVerdict b = classify(Shape(Ball{Vec2(0, 0), 1}), indicator(0.5));
  EXPECT_EQ(b.kind, VerdictKind::Ball);
  ASSERT_EQ(b.balls.size(), 1u);
  EXPECT_NEAR(b.balls[0].R, 1.0, 1e-6);
  const ShapeVerdict e = classify(Shape(Ellipse{Vec2(0, 0), 2, 1, 0}), indicator(0.5));
  EXPECT_EQ(e.kind, VerdictKind::NotConstant);
  EXPECT_EQ(to_string(VerdictKind::UnionOfBalls), "UnionOfBalls");
  EXPECT_THROW(classify(Shape(Ball{Vec2(0, 0), 1}), indicator(0.5), 4), ValidationError);
}

TEST(Nondegeneracy, BallIsNondegenerateTinyBlobIsNot) {
  EXPECT_GT(nondegeneracy_quotient(Shape(Ball{Vec2(0, 0), 1}), 0.5, 64), 0.1);
  const Shape blob(Ellipse{Vec2(0, 0), 0.2, 0.1, 0.3});
  EXPECT_LT(nondegeneracy_quotient(blob, 1.0, 64), 1e-3);
}

#include "nlc/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace nlc;

TEST(Lens, ClosedFormAgainstMonteCarlo) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(-1, 1);
  const double R = 1.0, r = 0.5;
  for (double d : {0.2, 0.7, 1.0, 1.4}) {
    const int N = 2000000;
    long hit = 0;
    for (int i = 0; i < N; ++i) {
      const Vec2 y = Vec2(d, 0) + r * Vec2(U(rng), U(rng));
      if ((y - Vec2(d, 0)).norm() < r && y.norm() < R) ++hit;
    }
    const double mc = 4 * r * r * double(hit) / N;
    const double se = 4 * r * r * std::sqrt(double(hit) / N * (1 - double(hit) / N) / N);
    EXPECT_NEAR(lens_area(R, r, d), mc, 5 * se + 1e-12) << "d=" << d;
  }
  EXPECT_NEAR(lens_area(1.0, 0.5, 0.3), kPi * 0.25, 1e-15);
  EXPECT_EQ(lens_area(1.0, 0.5, 1.6), 0.0);
}

TEST(Reflection, IsAnInvolutionAndIsometry) {
  const Hyperplane p{Vec2(0.6, 0.8), 0.3};
  const Vec2 x(1.2, -0.7), y(-0.4, 2.0);
  EXPECT_LT((reflect_point(reflect_point(x, p), p) - x).norm(), 1e-15);
  EXPECT_NEAR((reflect_point(x, p) - reflect_point(y, p)).norm(), (x - y).norm(), 1e-14);
  EXPECT_NEAR(reflect_point(x, p).dot(p.e) - p.tau, -(x.dot(p.e) - p.tau), 1e-14);
}

TEST(Shapes, MembershipAreaPerimeter) {
  const Shape b(Ball{Vec2(1, 2), 0.5});
  EXPECT_TRUE(b.inside(Vec2(1.2, 2.1)));
  EXPECT_FALSE(b.inside(Vec2(1.6, 2)));
  EXPECT_NEAR(b.area(), kPi / 4, 1e-15);
  EXPECT_NEAR(b.perimeter(), kPi, 1e-15);
  const Shape e(Ellipse{Vec2(0, 0), 2, 1, 0.3});
  EXPECT_NEAR(e.area(), 2 * kPi, 1e-14);
  // Ramanujan's approximation, good to ~1e-5 relative at this eccentricity.
  const double h = std::pow(1.0 / 3, 2);
  EXPECT_NEAR(e.perimeter(), kPi * 3 * (1 + 3 * h / (10 + std::sqrt(4 - 3 * h))), 1e-4);
  const Shape sq(make_polygon({{0, 0}, {2, 0}, {2, 1}, {0, 1}}));
  EXPECT_NEAR(sq.area(), 2.0, 1e-15);
  EXPECT_NEAR(sq.perimeter(), 6.0, 1e-15);
  EXPECT_THROW(make_polygon({{0, 0}, {0, 1}, {1, 0}}), ValidationError);
  EXPECT_TRUE(Shape(HalfPlane{Vec2(1, 0), 0.5}).inside(Vec2(0.4, 100)));
  EXPECT_FALSE(Shape(HalfPlane{Vec2(1, 0), 0.5}).bounded());
}

TEST(Shapes, NormalsAreOutwardUnit) {
  const Shape e(Ellipse{Vec2(0.3, 0), 2, 1, 0.5});
  for (const auto& tr : boundary_samples(e, 64)) {
    for (const auto& s : tr.samples) {
      EXPECT_NEAR(s.normal.norm(), 1.0, 1e-12);
      EXPECT_NEAR(e.level(s.x), 0.0, 1e-9);
      EXPECT_TRUE(e.inside(s.x - 1e-6 * s.normal));
      EXPECT_FALSE(e.inside(s.x + 1e-6 * s.normal));
      EXPECT_LT((s.tangent - perp(s.normal)).norm(), 1e-15);
    }
  }
}

TEST(Shapes, ReflectTranslateRotate) {
  const Hyperplane p{Vec2(1, 0), 0.5};
  const Shape e(Ellipse{Vec2(0, 0), 2, 1, 0.4});
  const Shape re = reflect_set(e, p);
  const Shape rs = reflect_set(Shape(rounded_square(Vec2(0.2, 0.1), 1.0, 0.2)), p);
  const Shape sq(rounded_square(Vec2(0.2, 0.1), 1.0, 0.2));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-3, 3);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 x(U(rng), U(rng));
    EXPECT_EQ(re.inside(x), e.inside(reflect_point(x, p)));
    EXPECT_EQ(rs.inside(x), sq.inside(reflect_point(x, p)));
  }
  const Shape t = translate_set(e, Vec2(1, -1));
  EXPECT_TRUE(t.inside(Vec2(1, -1)));
  EXPECT_FALSE(t.inside(Vec2(0, 0.9)));
  const Shape rot = rotate_set(Shape(Ellipse{Vec2(0, 0), 2, 1, 0}), kPi / 2);
  EXPECT_TRUE(rot.inside(Vec2(0, 1.9)));
  EXPECT_FALSE(rot.inside(Vec2(1.9, 0)));
}

TEST(Shapes, RayCrossings) {
  const Shape b(Ball{Vec2(0, 0), 1});
  std::vector<double> scratch;
  std::vector<Interval> pieces;
  ray_intervals(b, Vec2(-2, 0), Vec2(1, 0), 5.0, scratch, pieces);
  ASSERT_EQ(pieces.size(), 1u);
  EXPECT_NEAR(pieces[0].first, 1.0, 1e-14);
  EXPECT_NEAR(pieces[0].second, 3.0, 1e-14);
  const Shape u(BallUnion{{Ball{Vec2(0, 0), 1}, Ball{Vec2(3, 0), 1}}});
  ray_intervals(u, Vec2(0, 0), Vec2(1, 0), 10.0, scratch, pieces);
  ASSERT_EQ(pieces.size(), 2u);
  EXPECT_NEAR(pieces[1].first, 2.0, 1e-14);
  EXPECT_NEAR(pieces[1].second, 4.0, 1e-14);
  // Complement of the ball seen from inside.
  const Complement<Shape> c{b};
  ray_intervals(c, Vec2(0, 0), Vec2(0, 1), 1e14, scratch, pieces);
  ASSERT_EQ(pieces.size(), 1u);
  EXPECT_NEAR(pieces[0].first, 1.0, 1e-12);
}

TEST(Masks, RasterizedAreaAndContourLength) {
  const Shape b(Ball{Vec2(0.01, -0.02), 1});
  for (double h : {1.0 / 64, 1.0 / 128}) {
    const Mask m = rasterize(b, grid_for(b, h, 0.1), 0.1);
    EXPECT_NEAR(m.area(), kPi, 4 * h * 2 * kPi);
    EXPECT_NEAR(contour_length(m), 2 * kPi, 0.01);
  }
  const Mask m = rasterize(b, grid_for(b, 1.0 / 64, 0.1), 0.1);
  EXPECT_THROW(rasterize(b, grid_for(Shape(Ball{Vec2(0, 0), 0.5}), 1.0 / 64, 0.0), 0.1), ValidationError);
  // The level field is distance-like near the boundary.
  EXPECT_NEAR(m.level_at(Vec2(0.51, -0.02)), -0.5, 0.02);
  EXPECT_NEAR(m.level_gradient(Vec2(0.01, 0.98)).normalized().y(), 1.0, 1e-2);
}

TEST(Masks, SignedDistanceOfAPoint) {
  Grid g{Vec2(0, 0), 0.5, 11, 11};
  Bits bits = Bits::Zero(11, 11);
  bits(5, 5) = 1;
  const Eigen::ArrayXXd d = signed_distance(g, bits);
  EXPECT_NEAR(d(5 + 3, 5 + 4), 0.5 * 5, 0.5);
  EXPECT_LT(d(5, 5), 0);
}

TEST(Masks, ComponentLabels) {
  const Shape u(BallUnion{{Ball{Vec2(0, 0), 0.5}, Ball{Vec2(2, 0), 0.5}, Ball{Vec2(0, 2), 0.5}}});
  const Mask m = rasterize(u, grid_for(u, 1.0 / 32, 0.2), 0.2);
  int n = 0;
  const Eigen::ArrayXXi lab = label_components(m, &n);
  EXPECT_EQ(n, 3);
  EXPECT_EQ(lab.maxCoeff(), 3);
}

TEST(SymDiff, ReflectionOfSymmetricSetIsSmall) {
  const Shape e(Ellipse{Vec2(0.3, 0), 2, 1, 0});
  const Mask m = rasterize(e, grid_for(e, 1.0 / 64, 0.5), 0.5);
  const double per = e.perimeter();
  EXPECT_LT(reflected_sym_diff(m, Hyperplane{Vec2(1, 0), 0.3}), 3 * m.grid.h * per);
  // Off-centre plane: |E Δ R(E)| is large.
  EXPECT_GT(reflected_sym_diff(m, Hyperplane{Vec2(1, 0), 0.8}), 1.0);
  const Shape a(Ball{Vec2(0, 0), 1}), b(Ball{Vec2(0.5, 0), 1});
  const Grid g = grid_for(Shape(BallUnion{{Ball{Vec2(0, 0), 1}, Ball{Vec2(0.5, 0), 1}}}), 1.0 / 128, 0.2);
  EXPECT_NEAR(sym_diff_measure(a, b, g), 2 * (kPi - lens_area(1.0, 1.0, 0.5)), 0.02);
}

TEST(CriticalPlane, BallAndEllipse) {
  const Shape b(Ball{Vec2(0.2, -0.1), 1});
  const Vec2 e(std::cos(0.7), std::sin(0.7));
  const CriticalPlane c = critical_lambda(b, e, 1.0 / 128);
  EXPECT_NEAR(c.lambda, Vec2(0.2, -0.1).dot(e), 3.0 / 128);
  EXPECT_NEAR(c.mu, Vec2(0.2, -0.1).dot(e) + 1, 2.0 / 128);
  // Axis-aligned ellipse, e along an axis: symmetric plane, non-transversal contact.
  const Shape el(Ellipse{Vec2(0, 0), 2, 1, 0});
  const CriticalPlane ce = critical_lambda(el, Vec2(1, 0), 1.0 / 64);
  EXPECT_NEAR(ce.lambda, 0.0, 3.0 / 64);
  EXPECT_NE(ce.contact, Contact::interior_touching);
  // Oblique direction: the sweep stops before the centre with interior touching.
  const CriticalPlane co = critical_lambda(el, Vec2(std::cos(0.6), std::sin(0.6)), 1.0 / 64);
  EXPECT_GT(co.lambda, 0.05);
  EXPECT_NE(co.contact, Contact::non_transversal);
}

TEST(GraphSlope, EllipseAndDisk) {
  const Shape b(Ball{Vec2(0, 0), 1});
  const GraphSlope g = local_graph_slope(b, Vec2(1, 0), 0.5);
  EXPECT_TRUE(g.is_graph);
  EXPECT_LT(g.slope, 1.0);
  EXPECT_FALSE(local_graph_slope(b, Vec2(1, 0), 1.5).is_graph && local_graph_slope(b, Vec2(1, 0), 1.5).slope < 1);
}

TEST(Boundary, SamplesSplitByLength) {
  const Shape u(BallUnion{{Ball{Vec2(0, 0), 1}, Ball{Vec2(3, 0), 0.5}}});
  const auto tr = boundary_samples(u, 300);
  ASSERT_EQ(tr.size(), 2u);
  EXPECT_EQ(tr[0].samples.size() + tr[1].samples.size(), 300u);
  EXPECT_NEAR(double(tr[0].samples.size()) / tr[1].samples.size(), 2.0, 0.05);
  EXPECT_NEAR(tr[0].length, 2 * kPi, 1e-12);
}

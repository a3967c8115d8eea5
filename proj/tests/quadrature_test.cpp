#include <gtest/gtest.h>

#include "critvar/fields.hpp"
#include "critvar/quadrature.hpp"
#include "oracle.hpp"

using namespace critvar;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Quadrature, BuildGridIsGeometric) {
  const RadialGrid g = build_grid(3, 1e-8, 1e8, 2000);
  ASSERT_EQ(g.size(), 2000);
  const double ratio = g.node(1) / g.node(0);
  for (int i = 1; i < g.size(); ++i) {
    EXPECT_GT(g.node(i), g.node(i - 1));
    EXPECT_NEAR(g.node(i) / g.node(i - 1), ratio, 1e-12 * ratio);
  }
  EXPECT_GT(g.node(0), 0.0);
  EXPECT_NEAR(g.r_min(), 1e-8, 1e-20);
  EXPECT_NEAR(g.r_max() / 1e8, 1.0, 1e-12);
}

TEST(Quadrature, BuildGridRejectsDegenerateInput) {
  try {
    build_grid(3, 1.0, 1.0, 100);
    FAIL() << "expected invalid-range";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_range);
  }
  EXPECT_THROW(build_grid(3, -1.0, 1.0, 100), Error);
  EXPECT_THROW(build_grid(2, 1e-3, 1.0, 100), Error);
  EXPECT_THROW(build_grid(3, 1e-3, 1.0, 4), Error);
}

TEST(Quadrature, GaussianInFourDimensions) {
  const RadialGrid g = build_grid(4, 1e-6, 1e6, 4000);
  const double I = integrate_radial(g, [](double r) { return std::exp(-r * r); });
  EXPECT_LT(rel(I, M_PI * M_PI), 1e-10);
}

TEST(Quadrature, GaussianInThreeDimensions) {
  const RadialGrid g = default_grid(3);
  const double I = integrate_radial(g, [](double r) { return std::exp(-r * r); });
  EXPECT_LT(rel(I, std::pow(M_PI, 1.5)), 1e-10);
}

TEST(Quadrature, ZeroAndLinearity) {
  const RadialGrid g = default_grid(3);
  EXPECT_EQ(integrate_radial(g, [](double) { return 0.0; }), 0.0);
  auto f = [](double r) { return std::exp(-r * r); };
  auto h = [](double r) { return 1.0 / std::pow(1.0 + r * r, 3); };
  const double a = 2.5, b = -0.75;
  const double lhs = integrate_radial(g, [&](double r) { return a * f(r) + b * h(r); });
  const double rhs = a * integrate_radial(g, f) + b * integrate_radial(g, h);
  EXPECT_NEAR(lhs, rhs, 1e-13 * std::abs(rhs));
}

TEST(Quadrature, TalentiCriticalPowerMatchesBetaIntegral) {
  for (int N : {3, 4, 5}) {
    const RadialGrid g = default_grid(N);
    const double I = integrate_radial(g, [N](double r) { return std::pow(1.0 + r * r, -N); });
    const double adaptive = oracle::radial(N, [N](double r) { return std::pow(1.0 + r * r, -N); });
    EXPECT_LT(rel(I, adaptive), 1e-10) << "N = " << N;
    EXPECT_LT(rel(adaptive, oracle::omega(N) * oracle::talenti_radial_integral(N)), 1e-12);
  }
}

TEST(Quadrature, NonFiniteIntegrandRaises) {
  const RadialGrid g = build_grid(3, 1e-3, 1e3, 100);
  try {
    integrate_radial(g, [](double r) { return r > 1.0 ? std::nan("") : 1.0; });
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::non_finite_integrand);
  }
}

TEST(Quadrature, CrossReducesToRadialProduct) {
  const RadialGrid g = default_grid(3);
  auto f = [](double r) { return std::exp(-r * r); };
  auto h = [](double r) { return 1.0 / (1.0 + r * r); };
  const Point c = make_point(3, {0.3, -0.2, 0.1});
  const double cross = integrate_cross(g, f, c, h, c, 64);
  const double direct = integrate_radial(g, [&](double r) { return f(r) * h(r); });
  EXPECT_LT(rel(cross, direct), 1e-10);
  const double with_one = integrate_cross(g, f, c, [](double) { return 1.0; }, make_point(3, {1.0}), 64);
  EXPECT_LT(rel(with_one, integrate_radial(g, f)), 1e-10);
}

TEST(Quadrature, GaussianProductFormula) {
  const RadialGrid g = default_grid(3);
  auto f = [](double r) { return std::exp(-r * r); };
  for (double d : {0.5, 1.0, 2.0, 3.0}) {
    const double I = integrate_cross(g, f, origin(3), f, make_point(3, {d}), 64);
    const double exact = std::pow(M_PI, 1.5) / std::pow(2.0, 1.5) * std::exp(-d * d / 2.0);
    EXPECT_LT(rel(I, exact), 1e-10) << "d = " << d;
  }
}

TEST(Quadrature, CrossIsSymmetric) {
  const RadialGrid g = default_grid(4);
  auto f = [](double r) { return std::exp(-r * r); };
  auto h = [](double r) { return std::pow(1.0 + r * r, -2.0); };
  const Point c1 = make_point(4, {0.2, 0.4});
  const Point c2 = make_point(4, {-1.0, 0.5, 0.3});
  const double a = integrate_cross(g, f, c1, h, c2, 64);
  const double b = integrate_cross(g, h, c2, f, c1, 64);
  EXPECT_LT(rel(a, b), 1e-10);
}

TEST(Quadrature, CrossRejectsLowAngularOrder) {
  const RadialGrid g = default_grid(3);
  auto f = [](double r) { return std::exp(-r * r); };
  EXPECT_THROW(integrate_cross(g, f, origin(3), f, origin(3), 4), Error);
}

TEST(Quadrature, RefinementConvergesForBubbleIntegrands) {
  for (int N : {3, 4, 5}) {
    const RadialGrid g = default_grid(N);
    const RadialProfile gs = ground_state(N, 0.5 * hardy_constant(N), 1.0);
    const RadialProfile tb = talenti(N, 0.01);
    for (const RadialProfile* phi : {&gs, &tb}) {
      auto dens = [&](double r) { return phi->derivative(r) * phi->derivative(r); };
      const double coarse = integrate_radial(g, dens);
      const double fine = integrate_radial(g.refined(), dens);
      EXPECT_LE(rel(coarse, fine), 1e-6) << "N = " << N;
    }
  }
}

TEST(Quadrature, WideningDoesNotChangeBubbleIntegrals) {
  const RadialProfile phi = talenti(3, 1.0);
  auto dens = [&](double r) { return std::pow(phi.value(r), 6.0); };
  const double base = integrate_radial(default_grid(3), dens);
  const double wide = integrate_radial(build_grid(3, 1e-10, 1e10, 2500), dens);
  EXPECT_LE(rel(base, wide), 1e-6);
}

TEST(Quadrature, SphereMeasureFromGamma) {
  EXPECT_NEAR(sphere_measure(3), 4.0 * M_PI, 1e-14);
  EXPECT_NEAR(sphere_measure(4), 2.0 * M_PI * M_PI, 1e-13);
  EXPECT_NEAR(sphere_measure(5), 8.0 * M_PI * M_PI / 3.0, 1e-13);
}

TEST(Quadrature, CollinearFrame) {
  const std::vector<Point> on_line = {make_point(3, {1, 1, 0}), make_point(3, {2, 2, 0}), origin(3)};
  EXPECT_TRUE(collinear_frame(on_line).has_value());
  const std::vector<Point> off_line = {make_point(3, {1, 0, 0}), make_point(3, {0, 1, 0}), origin(3)};
  EXPECT_FALSE(collinear_frame(off_line).has_value());
}

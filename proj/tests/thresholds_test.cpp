#include <gtest/gtest.h>

#include "critvar/energy.hpp"
#include "critvar/thresholds.hpp"
#include "oracle.hpp"

using namespace critvar;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double prefactor(int N) { return std::pow(oracle::sobolev(N), 0.5 * N) / N; }

}  // namespace

TEST(Thresholds, LambdaN) {
  EXPECT_EQ(lambda_N(3), 0.25);
  EXPECT_EQ(lambda_N(4), 1.0);
  EXPECT_EQ(lambda_N(6), 4.0);
  EXPECT_THROW(lambda_N(2), Error);
}

TEST(Thresholds, BestSobolevMatchesClosedFormAndRefinement) {
  for (int N : {3, 4, 5, 6, 7}) {
    EXPECT_LT(rel(best_sobolev(N), oracle::sobolev(N)), 1e-10) << N;
    QuadratureSettings fine = default_quadrature(N);
    fine.lattice = fine.lattice.refined();
    const double refined = dirichlet_integral(talenti_bubble(N, 1.0, origin(N)), fine);
    EXPECT_LT(rel(refined, best_sobolev(N)), 1e-8);
  }
}

TEST(Thresholds, BestSobolevIsScaleFree) {
  const int N = 4;
  for (double r : {0.1, 1.0, 10.0}) {
    EXPECT_LT(rel(sobolev_quotient_QA(0.0, talenti_bubble(N, r, origin(N)), N), best_sobolev(N)), 1e-8);
  }
  EXPECT_LT(rel(sobolev_quotient_QA(0.0, talenti_bubble(N, 1.0, origin(N)), N), best_sobolev(N)), 1e-10);
}

TEST(Thresholds, CstarUnperturbed) {
  for (int N : {3, 4, 5}) {
    const double A = 0.3 * hardy_constant(N);
    const Threshold c = cstar(N, A, zero_coefficient(N));
    EXPECT_LT(rel(c.value, prefactor(N) * std::pow(0.7, 0.5 * (N - 1))), 1e-10);
  }
}

TEST(Thresholds, CstarBranchAndValue) {
  const int N = 3;
  const CoefficientProfile higher_at_zero =
      make_h_preset("gaussian_bump", {{"base", 0.0}, {"width", 1.0}, {"height", 0.05}}, N);
  const Threshold c = cstar(N, 0.1, higher_at_zero);
  EXPECT_EQ(c.branch, "zero");
  EXPECT_LT(rel(c.value, prefactor(N) * (1.0 - 0.15 / 0.25)), 1e-10);
  try {
    cstar(N, 0.2, higher_at_zero);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::coupling_out_of_range);
  }
}

TEST(Thresholds, CstarIsMonotone) {
  const int N = 3;
  const CoefficientProfile zero = zero_coefficient(N);
  EXPECT_GT(cstar(N, 0.05, zero).value, cstar(N, 0.1, zero).value);
  auto bump = [&](double base, double height) {
    return make_h_preset("gaussian_bump", {{"base", base}, {"width", 1.0}, {"height", height}}, N);
  };
  // h(inf) fixed, h(0) raised
  EXPECT_GT(cstar(N, 0.05, bump(0.01, 0.02)).value, cstar(N, 0.05, bump(0.01, 0.04)).value);
  // h(0) fixed, h(inf) raised past it
  EXPECT_GT(cstar(N, 0.05, bump(0.01, 0.0)).value, cstar(N, 0.05, bump(0.03, -0.02)).value);
}

TEST(Thresholds, KThresholdsForConstantOne) {
  const int N = 3;
  const double lambda = 0.2 * hardy_constant(N);
  const CoefficientProfile k = make_k_preset("constant_one", {}, N);
  const double expect = prefactor(N) * std::pow(0.8, 0.5 * (N - 1));
  EXPECT_LT(rel(tilde_c(N, lambda, k).value, expect), 1e-10);
  EXPECT_LT(rel(tilde_c1(N, lambda, k).value, expect), 1e-10);
  EXPECT_LT(rel(hat_c(N, lambda, k).value, expect), 1e-10);
}

TEST(Thresholds, TildeCWithVanishingEnds) {
  const int N = 3;
  const CoefficientProfile k = make_k_preset("two_peak", {}, N);
  const Threshold t = tilde_c(N, 0.1, k);
  EXPECT_EQ(t.branch, "norm");
  EXPECT_LT(rel(t.value, prefactor(N)), 1e-10);
}

TEST(Thresholds, HatCIgnoresNegativeCenter) {
  const int N = 3;
  const CoefficientProfile k = make_k_preset("sign_changing", {}, N);
  ASSERT_LT(k.value_at_zero(), 0.0);
  const Threshold t = hat_c(N, 0.1, k);
  EXPECT_NE(t.branch, "zero");
  EXPECT_LT(rel(t.value, prefactor(N) * std::pow(k.max_value(), -(N - 2.0) / 2.0)), 1e-10);
}

TEST(Thresholds, Eps0WithVanishingEnds) {
  const int N = 3;
  const CoefficientProfile k = make_k_preset("two_peak", {}, N);
  EXPECT_TRUE(std::isinf(b_lambda(N, 0.1, k)));
  const double e = eps0(N, k);
  EXPECT_LT(e, eps0_cap(N));
  EXPECT_GT(e, eps0_cap(N) * (1.0 - 1e-8));
}

TEST(Thresholds, Eps0RequiresK0) {
  try {
    eps0(3, make_k_preset("constant_one", {}, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::hypothesis_violated);
  }
}

TEST(Thresholds, Eps0BisectionWithPlateauAtOrigin) {
  const int N = 3;
  const CoefficientProfile k = make_k_preset("two_peak", {{"k0", 0.5}}, N);
  ASSERT_NEAR(k.value_at_zero(), 0.5, 1e-12);
  const double e = eps0(N, k);
  const double target = std::pow(k.sup_norm(), -(N - 2.0) / 2.0);
  EXPECT_LE(target, b_lambda(N, e - 1e-6, k));
  EXPECT_GT(target, b_lambda(N, e + 1e-6, k));
  // closed form of the crossing: (1 - e/Lambda)^{(N-1)/2} = (k(0)/||k||)^{(N-2)/2}
  const double closed = hardy_constant(N) * (1.0 - std::pow(0.5, (N - 2.0) / (N - 1.0)));
  EXPECT_NEAR(e, std::min(closed, eps0_cap(N)), 1e-12);
}

TEST(Thresholds, TildeCIsConstantBelowEps0) {
  const int N = 3;
  for (const CoefficientProfile& k : {make_k_preset("two_peak", {}, N), make_k_preset("two_peak", {{"k0", 0.5}}, N),
                                      make_k_preset("m_peak", {{"m", 4}}, N)}) {
    const double e = eps0(N, k);
    const double expect = prefactor(N) * std::pow(k.sup_norm(), -(N - 2.0) / 2.0);
    for (double f : {0.01, 0.1, 0.5, 0.9, 1.0}) EXPECT_LT(rel(tilde_c(N, f * e, k).value, expect), 1e-10);
  }
}

TEST(Thresholds, PositivityGateBelowCap) {
  for (int N : {3, 4, 5}) {
    const double cap = eps0_cap(N);
    for (double f : {0.01, 0.5, 0.99, 0.999999}) EXPECT_TRUE(positivity_gate(N, f * cap));
    EXPECT_FALSE(positivity_gate(N, cap * (1.0 + 1e-9)));
    EXPECT_NEAR(2.0 * std::pow(1.0 - cap / hardy_constant(N), 0.5 * (N - 1)), 1.0, 1e-14);
  }
}

TEST(Thresholds, NormBranchHomogeneity) {
  const int N = 4;
  const CoefficientProfile k = make_k_preset("two_peak", {}, N);
  for (double c : {0.5, 2.0, 3.0}) {
    const double ratio = tilde_c(N, 0.1, k.scaled(c)).value / tilde_c(N, 0.1, k).value;
    EXPECT_NEAR(ratio, std::pow(c, -(N - 2.0) / 2.0), 1e-12);
  }
}

TEST(Thresholds, ReportCollectsDefinedThresholds) {
  const int N = 3;
  const ProblemSpec spec = ProblemSpec::make(N, 0.05, zero_coefficient(N), make_k_preset("two_peak", {}, N));
  const ThresholdReport r = threshold_report(spec);
  ASSERT_TRUE(r.tilde_c.has_value());
  ASSERT_TRUE(r.eps0.has_value());
  EXPECT_FALSE(r.tilde_c1.has_value());
  EXPECT_NEAR(r.S, oracle::sobolev(N), 1e-10 * r.S);
}

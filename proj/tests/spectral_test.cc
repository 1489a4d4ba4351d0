#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "fragtree/contour.hpp"
#include "fragtree/spectral.hpp"

namespace fragtree {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(FindRoots, BinaryHasOnlyTheTrivialRoot) {
  const Spectrum s = find_roots(SplitLaw::binary_uniform());
  ASSERT_EQ(s.roots.size(), 1u);
  EXPECT_NEAR(std::abs(s.roots[0].lambda - 1.0), 0.0, 1e-12);
  EXPECT_TRUE(s.roots[0].simple_certified);
  EXPECT_EQ(classify_phase(s).phase, Phase::Normal);
}

TEST(FindRoots, QuadSplitMatchesClosedForm) {
  for (int d : {3, 5, 8, 9, 12}) {
    const Spectrum s = find_roots(SplitLaw::quad_split(d));
    ASSERT_FALSE(s.roots.empty());
    EXPECT_NEAR(std::abs(s.roots[0].lambda - 1.0), 0.0, 1e-12);
    for (const Root& r : s.roots) {
      // (1 + lambda)^d = 2^d, so lambda = 2 exp(2 pi i k / d) - 1.
      const double k = std::arg(r.lambda + 1.0) * d / (2.0 * kPi);
      const Complex expected = 2.0 * std::exp(Complex(0.0, 2.0 * kPi * std::round(k) / d)) - 1.0;
      EXPECT_NEAR(std::abs(r.lambda - expected), 0.0, 1e-10) << "d=" << d;
      EXPECT_LE(r.residual, 1e-10);
    }
  }
}

TEST(FindRoots, OrderingAndConjugatePairs) {
  const Spectrum s = find_roots(SplitLaw::quad_split(9));
  ASSERT_EQ(s.roots.size(), 3u);
  EXPECT_NEAR(s.roots[1].lambda.real(), 0.532088886237956070, 1e-12);
  EXPECT_NEAR(s.roots[1].lambda.imag(), 1.28557521937307865, 1e-12);
  EXPECT_NEAR(std::abs(s.roots[2].lambda - std::conj(s.roots[1].lambda)), 0.0, 1e-14);
}

TEST(FindRoots, MaryThresholdBetween26And27) {
  const Spectrum s26 = find_roots(SplitLaw::mary_uniform(26));
  const Spectrum s27 = find_roots(SplitLaw::mary_uniform(27));
  ASSERT_GE(s26.roots.size(), 3u);
  ASSERT_GE(s27.roots.size(), 3u);
  EXPECT_NEAR(s26.roots[1].lambda.real(), 0.499143265217225584, 1e-10);
  EXPECT_NEAR(s26.roots[1].lambda.imag(), 2.20538267853720088, 1e-10);
  EXPECT_NEAR(s27.roots[1].lambda.real(), 0.516970121848480714, 1e-10);
  EXPECT_NEAR(s27.roots[1].lambda.imag(), 2.17886535362483041, 1e-10);
  EXPECT_EQ(classify_phase(s26).phase, Phase::Normal);
  EXPECT_EQ(classify_phase(s27).phase, Phase::Periodic);
}

TEST(FindRoots, RationalLawsAgreeWithArgumentPrinciple) {
  // Beta(27, 1) is solved through the companion matrix; recompute its
  // second root from the transform alone and compare.
  const Spectrum s = find_roots(SplitLaw::beta(27.0, 1.0), 0.3);
  ASSERT_GE(s.roots.size(), 2u);
  EXPECT_NEAR(s.roots[1].lambda.real(), 0.501455215404180527, 1e-9);
  EXPECT_NEAR(s.roots[1].lambda.imag(), 1.66719768040511911, 1e-9);
  for (const SplitLaw& law : {SplitLaw::mary_uniform(12), SplitLaw::beta(6.0, 2.0)}) {
    const Spectrum companion = find_roots(law, 0.05, 20.0);
    const AnalyticFunction f{[&law](Complex z) { return phi(law, z).value - 1.0; },
                             [&law](Complex z) { return phi_prime(law, z).value; }};
    const auto zeros = isolate_zeros(f, {0.05 - 0.0123, 1.05, -20.0 - 0.0137, 20.0 + 0.0071});
    std::size_t matched = 0;
    for (const IsolatedZero& z : zeros) {
      if (z.z.real() < 0.05) continue;
      for (const Root& r : companion.roots) {
        if (std::abs(r.lambda - z.z) < 1e-9) ++matched;
      }
    }
    EXPECT_EQ(matched, companion.roots.size()) << law.spec_string();
  }
}

TEST(FindRoots, ArgumentPrincipleFamilies) {
  const Spectrum s = find_roots(SplitLaw::deterministic({0.2, 0.3, 0.5}), 0.05, 30.0);
  EXPECT_EQ(s.method, RootMethod::ArgumentPrinciple);
  ASSERT_TRUE(s.contour_count.has_value());
  // The contour encloses the upper half of the strip; the rest follows by conjugation.
  int upper = 0;
  for (const Root& r : s.roots) upper += r.lambda.imag() >= 0.0;
  EXPECT_EQ(*s.contour_count, upper);
  for (const Root& r : s.roots) EXPECT_LE(r.residual, 1e-9);
  const Spectrum det = find_roots(SplitLaw::deterministic({1.0 / 3.0, 2.0 / 3.0}), 0.05, 30.0);
  EXPECT_EQ(det.method, RootMethod::ArgumentPrinciple);
  EXPECT_NEAR(std::abs(det.roots[0].lambda - 1.0), 0.0, 1e-10);
}

TEST(FindRoots, InvalidStripThrows) {
  EXPECT_THROW(find_roots(SplitLaw::binary_uniform(), 1.5), PreconditionError);
  EXPECT_THROW(find_roots(SplitLaw::binary_uniform(), 0.05, -1.0), PreconditionError);
}

TEST(ClassifyPhase, LatticeLawsAreDegenerate) {
  const Spectrum s = find_roots(SplitLaw::deterministic({0.5, 0.5}), 0.05, 20.0);
  EXPECT_EQ(classify_phase(s).phase, Phase::Degenerate);
}

TEST(MeanExpansion, BinaryIsExactlyTwoXMinusOne) {
  const SplitLaw law = SplitLaw::binary_uniform();
  const MomentModel m = mean_expansion(law, find_roots(law));
  EXPECT_NEAR(m.alpha, 0.5, 1e-15);
  ASSERT_FALSE(m.a_coeffs.empty());
  EXPECT_NEAR(m.a_coeffs[0].coefficient.real(), 2.0, 1e-12);
  ASSERT_TRUE(m.a0.has_value());
  EXPECT_NEAR(*m.a0, -1.0, 1e-15);
  for (double x : {1.0, 3.7, 1e3}) EXPECT_NEAR(m.mean(x), 2.0 * x - 1.0, 1e-9 * x);
}

TEST(MeanExpansion, LeadingCoefficientIsInverseAlpha) {
  for (const SplitLaw& law : {SplitLaw::mary_uniform(7), SplitLaw::quad_split(9), SplitLaw::beta(2.0, 2.0)}) {
    const MomentModel m = mean_expansion(law, find_roots(law));
    EXPECT_NEAR(m.a_coeffs[0].coefficient.real(), 1.0 / m.alpha, 1e-10) << law.spec_string();
    EXPECT_NEAR(m.a_coeffs[0].coefficient.imag(), 0.0, 1e-12);
  }
  const MomentModel beta22 = mean_expansion(SplitLaw::beta(2.0, 2.0), find_roots(SplitLaw::beta(2.0, 2.0)));
  EXPECT_NEAR(beta22.alpha, 7.0 / 12.0, 1e-12);
}

TEST(MeanExpansion, PeriodicConstants) {
  const SplitLaw law = SplitLaw::quad_split(9);
  const MomentModel m = mean_expansion(law, find_roots(law));
  EXPECT_EQ(m.phase, Phase::Periodic);
  ASSERT_TRUE(m.gamma && m.kappa);
  EXPECT_NEAR(m.gamma->real(), 0.283303231128074597, 1e-10);
  EXPECT_NEAR(m.gamma->imag(), -0.147577281643415548, 1e-10);
  EXPECT_NEAR(*m.kappa, 0.5 * (0.5 + 0.532088886237956070), 1e-12);
}

TEST(Beta, BinaryFromBothRoutes) {
  const SplitLaw law = SplitLaw::binary_uniform();
  const Spectrum s = find_roots(law);
  const double exact = 8.0 * std::log(2.0) - 5.0;
  const Estimate normal = beta_normal(law, s);
  EXPECT_NEAR(normal.value, exact, std::max(1e-6, 2.0 * normal.error));
  EXPECT_LT(normal.error, 1e-5);
  const Estimate rational = beta_rational(law, mean_expansion(law, s));
  EXPECT_NEAR(rational.value, exact, 1e-12);
}

TEST(Beta, MaryAndBetaLaws) {
  const SplitLaw mary3 = SplitLaw::mary_uniform(3);
  const Spectrum s = find_roots(mary3);
  const Estimate rational = beta_rational(mary3, mean_expansion(mary3, s), 400'000);
  EXPECT_NEAR(rational.value, 0.202314826649810012, 4.0 * rational.error + 1e-4);
  const Estimate normal = beta_normal(mary3, s);
  EXPECT_NEAR(normal.value, 0.202314826649810012, 1e-5);

  const SplitLaw beta22 = SplitLaw::beta(2.0, 2.0);
  EXPECT_NEAR(beta_normal(beta22, find_roots(beta22)).value, 0.230301886245788250, 1e-5);
}

TEST(Beta, NormalRouteRefusesPeriodicLaws) {
  const SplitLaw law = SplitLaw::quad_split(9);
  EXPECT_THROW(beta_normal(law, find_roots(law)), PreconditionError);
}

TEST(VariancePeriodic, RealAndLogPeriodic) {
  const SplitLaw law = SplitLaw::quad_split(9);
  const Spectrum s = find_roots(law);
  const PeriodicVariance v = variance_periodic(law, s);
  ASSERT_EQ(v.terms.size(), 4u);
  const Complex l2 = s.roots[1].lambda;
  const double period = std::exp(2.0 * kPi / l2.imag());
  for (double x : {10.0, 77.0, 1234.0}) {
    Complex total = 0.0;
    for (const auto& t : v.terms) total += t.coefficient * std::exp((t.lambda_i + t.lambda_k) * std::log(x));
    EXPECT_NEAR(total.imag(), 0.0, 1e-10 * std::abs(total));
    EXPECT_GT(v.predict(x), 0.0);
    EXPECT_NEAR(v.predict(x * period), v.predict(x) * std::pow(period, 2.0 * l2.real()),
                1e-8 * v.predict(x * period));
  }
  EXPECT_THROW(variance_periodic(SplitLaw::binary_uniform(), find_roots(SplitLaw::binary_uniform())),
               PreconditionError);
}

TEST(PhaseCrossing, BetaFamilyThreshold) {
  const PhaseCrossing c = locate_phase_crossing([](double a) { return SplitLaw::beta(a, 1.0); }, 26.0, 28.0, 1e-3);
  EXPECT_NEAR(c.parameter, 26.8942931628106486, 2e-3);
  EXPECT_THROW(locate_phase_crossing([](double a) { return SplitLaw::beta(a, 1.0); }, 2.0, 3.0),
               PreconditionError);
}

}  // namespace
}  // namespace fragtree

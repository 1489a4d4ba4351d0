#include <cmath>

#include <gtest/gtest.h>

#include "fragtree/renewal.hpp"
#include "fragtree/spectral.hpp"

namespace fragtree {
namespace {

double one(double t) { return t >= 0.0 ? 1.0 : 0.0; }

MeasureGrid grid_for(const SplitLaw& law, double h = kDefaultRenewalStep, double t_max = 8.0) {
  Rng rng(11);
  return discretize_measure(law, h, t_max, 0, rng);
}

TEST(DiscretizeMeasure, TiltedMassIsOne) {
  for (const SplitLaw& law : {SplitLaw::binary_uniform(), SplitLaw::mary_uniform(3), SplitLaw::quad_split(4),
                              SplitLaw::beta(2.0, 2.0), SplitLaw::deterministic({0.3, 0.7})}) {
    const MeasureGrid g = grid_for(law);
    EXPECT_NEAR(g.tilt_check, 1.0, std::max(g.tilt_error, 1e-3)) << law.spec_string();
    EXPECT_FALSE(g.monte_carlo);
    EXPECT_NEAR(g.total_mass, law.positive_part_count(), 1e-12);
  }
}

TEST(DiscretizeMeasure, MonteCarloBinningAgrees) {
  const SplitLaw law = SplitLaw::binary_uniform();
  Rng rng(3);
  const MeasureGrid mc = discretize_measure(law, 1e-2, 5.0, 200'000, rng, true);
  EXPECT_TRUE(mc.monte_carlo);
  const MeasureGrid exact = grid_for(law, 1e-2, 5.0);
  ASSERT_EQ(mc.size(), exact.size());
  double mass_mc = 0.0;
  double mass_exact = 0.0;
  for (std::size_t k = 0; k < 100; ++k) {
    mass_mc += mc.mu_mass[k];
    mass_exact += exact.mu_mass[k];
  }
  EXPECT_NEAR(mass_mc, mass_exact, 0.01);
}

TEST(DiscretizeMeasure, CoarsenedKeepsMass) {
  const MeasureGrid g = grid_for(SplitLaw::mary_uniform(4), 1e-3, 4.0);
  const MeasureGrid c = g.coarsened();
  EXPECT_DOUBLE_EQ(c.h, 2e-3);
  double a = 0.0;
  double b = 0.0;
  for (double m : g.mu_mass) a += m;
  for (double m : c.mu_mass) b += m;
  EXPECT_NEAR(a, b, 1e-9);
}

TEST(SolveRenewal, ZeroForcingGivesZero) {
  const RenewalSolution s = solve_renewal(grid_for(SplitLaw::binary_uniform(), 1e-2, 3.0), [](double) { return 0.0; });
  for (double v : s.values) EXPECT_EQ(v, 0.0);
}

TEST(SolveRenewal, BinaryMeanWithinTwoPercent) {
  const MeasureGrid g = grid_for(SplitLaw::binary_uniform());
  const RenewalSolution s = solve_renewal(g, one);
  for (double t : {0.5, 2.0, 5.0, 7.9}) {
    const double exact = 2.0 * std::exp(t) - 1.0;
    EXPECT_NEAR(s.at(t) / exact, 1.0, 0.02) << t;
  }
  EXPECT_EQ(s.at(-1.0), 0.0);
}

TEST(SolveRenewal, ErrorShrinksWithStep) {
  const SplitLaw law = SplitLaw::binary_uniform();
  const double t = 6.0;
  const double exact = 2.0 * std::exp(t) - 1.0;
  const double coarse = std::abs(solve_renewal(grid_for(law, 4e-3), one).at(t) - exact);
  const double fine = std::abs(solve_renewal(grid_for(law, 2e-3), one).at(t) - exact);
  EXPECT_LT(fine, 0.7 * coarse);
  EXPECT_GT(fine, 0.3 * coarse);
  const RenewalSolution s = solve_renewal(grid_for(law, 2e-3), one);
  // The |F_h - F_2h| estimate brackets the true error to within a small factor.
  const std::size_t k = static_cast<std::size_t>(std::lround(t / 2e-3));
  EXPECT_GT(s.error_estimate[k], 0.3 * fine);
  EXPECT_LT(s.error_estimate[k], 3.0 * fine);
}

TEST(SolveRenewal, MaryMeanGrowsLikeXOverAlpha) {
  const MeasureGrid g = grid_for(SplitLaw::mary_uniform(3));
  const RenewalSolution s = solve_renewal(g, one);
  EXPECT_NEAR(s.at(7.5) / std::exp(7.5), 1.2, 0.01);
}

TEST(SolveRenewal, QuadSplitMatchesExactMean) {
  const SplitLaw law = SplitLaw::quad_split(9);
  const MomentModel model = mean_expansion(law, find_roots(law));
  const RenewalSolution s = solve_renewal(grid_for(law, kDefaultRenewalStep, 8.0), one);
  for (double t : {3.0, 5.0, 7.0}) {
    EXPECT_NEAR(s.at(t) / model.mean(std::exp(t)), 1.0, 0.02) << t;
  }
}

TEST(VarianceRenewal, BinaryApproachesBetaTimesX) {
  const SplitLaw law = SplitLaw::binary_uniform();
  const MeasureGrid g = grid_for(law, 2e-3, 7.0);
  const RenewalSolution mean = solve_renewal(g, one);
  Rng rng(5);
  VarianceRenewalOptions options;
  options.draws = 50'000;
  const RenewalSolution var = variance_renewal(g, mean, law, rng, options);
  const double t = std::log(1000.0);
  EXPECT_NEAR(var.at(t) / 1000.0, 8.0 * std::log(2.0) - 5.0, 0.02);
  EXPECT_FALSE(var.mc_error.empty());
}

TEST(VarianceRenewal, DeterministicLawHasSmallVariance) {
  const SplitLaw law = SplitLaw::deterministic({1.0 / 3.0, 2.0 / 3.0});
  const MeasureGrid g = grid_for(law, 2e-3, 6.0);
  const RenewalSolution mean = solve_renewal(g, one);
  Rng rng(5);
  const RenewalSolution var = variance_renewal(g, mean, law, rng);
  // N(x) is deterministic; only discretisation noise remains.
  EXPECT_LT(std::abs(var.at(5.0)), 0.05 * mean.at(5.0));
}

}  // namespace
}  // namespace fragtree

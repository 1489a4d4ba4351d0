#include <cmath>

#include <gtest/gtest.h>

#include "fragtree/special_functions.hpp"

namespace fragtree {
namespace {

// Reference values computed with mpmath at 30 digits.
TEST(LogGamma, MatchesHighPrecisionValues) {
  const Complex a = log_gamma({0.5, 1.3});
  EXPECT_NEAR(a.real(), -1.12323844386550818, 1e-13);
  EXPECT_NEAR(a.imag(), -0.92545496594506683, 1e-13);
  const Complex b = log_gamma({12.5, -40.0});
  EXPECT_NEAR(b.real(), -17.4713098555178820, 1e-11);
  EXPECT_NEAR(b.imag(), -124.631762156083540, 1e-11);
}

TEST(LogGamma, ReflectionBranchAgreesModuloTwoPi) {
  // Only exp(log_gamma) is single-valued across the reflection formula.
  const Complex z(-2.3, 0.7);
  const Complex value = std::exp(log_gamma(z));
  const Complex expected = std::exp(Complex(-1.266429485193089380, -8.07678236671205563));
  EXPECT_NEAR(value.real(), expected.real(), 1e-13);
  EXPECT_NEAR(value.imag(), expected.imag(), 1e-13);
}

TEST(LogGamma, RealAxisMatchesStdLgamma) {
  for (double x : {0.1, 0.5, 1.0, 2.5, 7.0, 33.3, 170.2}) {
    EXPECT_NEAR(log_gamma(Complex(x, 0.0)).real(), std::lgamma(x), 1e-12 * std::max(1.0, std::lgamma(x)));
  }
}

TEST(LogGamma, PolesThrow) {
  EXPECT_THROW(log_gamma(Complex(0.0, 0.0)), std::domain_error);
  EXPECT_THROW(log_gamma(Complex(-3.0, 0.0)), std::domain_error);
}

TEST(Digamma, MatchesHighPrecisionValues) {
  const Complex a = digamma(Complex(0.5, 1.3));
  EXPECT_NEAR(a.real(), 0.234017596872099575, 1e-13);
  EXPECT_NEAR(a.imag(), 1.56990579746376853, 1e-13);
  const Complex b = digamma(Complex(-2.3, 0.7));
  EXPECT_NEAR(b.real(), 1.13721747360847450, 1e-12);
  EXPECT_NEAR(b.imag(), 2.87424705337365529, 1e-12);
  EXPECT_NEAR(digamma(3.7), 1.16715353936151144, 1e-14);
}

TEST(Harmonic, IntegerArguments) {
  EXPECT_NEAR(harmonic(1.0), 1.0, 1e-14);
  EXPECT_NEAR(harmonic(4.0), 25.0 / 12.0, 1e-14);
  double h = 0.0;
  for (int k = 1; k <= 27; ++k) h += 1.0 / k;
  EXPECT_NEAR(harmonic(27.0), h, 1e-13);
}

TEST(BetaFunction, ComplexArguments) {
  const Complex v = beta_function({1.5, 0.4}, {2.2, -0.4});
  EXPECT_NEAR(v.real(), 0.203837230738597243, 1e-13);
  EXPECT_NEAR(v.imag(), -0.0408821471663757655, 1e-13);
  EXPECT_NEAR(beta_function(2.0, 3.0).real(), 1.0 / 12.0, 1e-15);
}

}  // namespace
}  // namespace fragtree

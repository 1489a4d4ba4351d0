#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "fragtree/contour.hpp"
#include "fragtree/polynomial.hpp"
#include "fragtree/quadrature.hpp"

namespace fragtree {
namespace {

TEST(Polynomial, EvaluationAndArithmetic) {
  const Polynomial p({1.0, -3.0, 2.0});  // 2z^2 - 3z + 1
  EXPECT_EQ(p.degree(), 2);
  EXPECT_NEAR(std::abs(p(Complex(2.0, 0.0)) - 3.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(p.derivative(Complex(1.0, 1.0)) - Complex(1.0, 4.0)), 0.0, 1e-15);
  const Polynomial q = Polynomial::from_real_roots({1.0, 2.0});
  const Polynomial product = p * q;
  EXPECT_EQ(product.degree(), 4);
  EXPECT_NEAR(std::abs(product(Complex(0.5, 0.0))), 0.0, 1e-15);
  EXPECT_EQ((q - q).degree(), 0);
}

TEST(Polynomial, RootsOfUnity) {
  std::vector<double> c(9, 0.0);
  c[0] = -1.0;
  c[8] = 1.0;
  const auto roots = Polynomial(c).roots();
  ASSERT_EQ(roots.size(), 8u);
  for (const Complex& r : roots) {
    EXPECT_NEAR(std::abs(r), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(std::pow(r, 8) - 1.0), 0.0, 1e-11);
  }
}

TEST(Polynomial, WilkinsonStyleRealRoots) {
  std::vector<double> expected;
  for (int k = 1; k <= 10; ++k) expected.push_back(k);
  auto roots = Polynomial::from_real_roots(expected).roots();
  std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) { return a.real() < b.real(); });
  for (int k = 0; k < 10; ++k) EXPECT_NEAR(std::abs(roots[k] - expected[k]), 0.0, 1e-6);
}

AnalyticFunction cubic() {
  // (z - 1)(z - (0.5 + 2i))(z - (0.5 - 2i))
  return {[](Complex z) { return (z - 1.0) * ((z - 0.5) * (z - 0.5) + 4.0); },
          [](Complex z) { return (z - 0.5) * (z - 0.5) + 4.0 + 2.0 * (z - 1.0) * (z - 0.5); }};
}

TEST(Contour, WindingCountsZeros) {
  const AnalyticFunction f = cubic();
  EXPECT_EQ(phase_winding(f, {0.0, 2.0, -3.0, 3.0}), 3);
  EXPECT_EQ(phase_winding(f, {0.0, 2.0, 0.3, 3.0}), 1);
  EXPECT_EQ(phase_winding(f, {1.5, 2.0, -1.0, 1.0}), 0);
  EXPECT_EQ(trapezoid_winding(f, {0.0, 2.0, -3.0, 3.0}), 3);
  EXPECT_EQ(circle_winding(f, Complex(0.5, 2.0), 0.1), 1);
}

TEST(Contour, IsolatesAndRefinesZeros) {
  const auto zeros = isolate_zeros(cubic(), {0.0, 2.0, -3.0, 3.0});
  ASSERT_EQ(zeros.size(), 3u);
  int found = 0;
  for (const IsolatedZero& z : zeros) {
    for (Complex target : {Complex(1.0, 0.0), Complex(0.5, 2.0), Complex(0.5, -2.0)}) {
      if (std::abs(z.z - target) < 1e-10) ++found;
    }
  }
  EXPECT_EQ(found, 3);
}

TEST(Contour, DoubleZeroReportedWithMultiplicity) {
  const Complex c(0.31, 0.17);
  const AnalyticFunction f{[c](Complex z) { return (z - c) * (z - c); }, [c](Complex z) { return 2.0 * (z - c); }};
  EXPECT_EQ(circle_winding(f, c, 0.05), 2);
  IsolationOptions options;
  options.min_cell = 1e-3;
  const auto zeros = isolate_zeros(f, {0.0, 1.0, -0.45, 0.55}, options);
  int total = 0;
  for (const auto& z : zeros) total += z.multiplicity;
  EXPECT_EQ(total, 2);
  ASSERT_EQ(zeros.size(), 1u);
  EXPECT_LT(std::abs(zeros[0].z - c), 1e-3);
}

TEST(Contour, NewtonRefineConvergesAndFails) {
  const auto root = newton_refine(cubic(), Complex(0.6, 1.8));
  ASSERT_TRUE(root.has_value());
  EXPECT_NEAR(std::abs(*root - Complex(0.5, 2.0)), 0.0, 1e-12);
  // Newton for z^2 + 1 started on the real axis never leaves it.
  const AnalyticFunction f{[](Complex z) { return z * z + 1.0; }, [](Complex z) { return 2.0 * z; }};
  EXPECT_FALSE(newton_refine(f, 0.5).has_value());
}

TEST(Quadrature, SmoothAndEndpointSingularIntegrands) {
  const auto a = integrate_adaptive([](double x) { return std::sin(x); }, 0.0, std::numbers::pi);
  EXPECT_NEAR(a.value, 2.0, 1e-12);
  const auto b = integrate_adaptive([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 1e-8, 40);
  EXPECT_NEAR(b.value, 2.0, 1e-6);
}

}  // namespace
}  // namespace fragtree

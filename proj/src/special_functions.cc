#include "fragtree/special_functions.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fragtree {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kShiftThreshold = 10.0;

// B_{2k} / (2k (2k - 1)) for k = 1..10.
constexpr std::array<double, 10> kStirlingCoefficients = {
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
};

// B_{2k} / (2k) for k = 1..10.
constexpr std::array<double, 10> kDigammaCoefficients = {
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
    43867.0 / 14364.0,
    -174611.0 / 6600.0,
};

bool is_nonpositive_integer(Complex z) {
  return z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real());
}

Complex log_gamma_stirling(Complex z) {
  // Re z >= kShiftThreshold here.
  const Complex inv = 1.0 / z;
  const Complex inv2 = inv * inv;
  Complex series = 0.0;
  Complex power = inv;
  for (double c : kStirlingCoefficients) {
    series += c * power;
    power *= inv2;
  }
  return (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * kPi) + series;
}

Complex digamma_asymptotic(Complex z) {
  const Complex inv = 1.0 / z;
  const Complex inv2 = inv * inv;
  Complex series = 0.0;
  Complex power = inv2;
  for (double c : kDigammaCoefficients) {
    series += c * power;
    power *= inv2;
  }
  return std::log(z) - 0.5 * inv - series;
}

}  // namespace

Complex log_gamma(Complex z) {
  if (is_nonpositive_integer(z)) {
    throw std::domain_error("log_gamma: pole at non-positive integer");
  }
  if (z.real() < 0.5) {
    // Gamma(z) Gamma(1 - z) = pi / sin(pi z)
    return std::log(kPi) - std::log(std::sin(kPi * z)) - log_gamma(1.0 - z);
  }
  Complex shift = 0.0;
  while (z.real() < kShiftThreshold) {
    shift += std::log(z);
    z += 1.0;
  }
  return log_gamma_stirling(z) - shift;
}

Complex digamma(Complex z) {
  if (is_nonpositive_integer(z)) {
    throw std::domain_error("digamma: pole at non-positive integer");
  }
  if (z.real() < 0.5) {
    // psi(1 - z) - psi(z) = pi cot(pi z)
    return digamma(1.0 - z) - kPi / std::tan(kPi * z);
  }
  Complex shift = 0.0;
  while (z.real() < kShiftThreshold) {
    shift += 1.0 / z;
    z += 1.0;
  }
  return digamma_asymptotic(z) - shift;
}

double digamma(double x) { return digamma(Complex(x, 0.0)).real(); }

double harmonic(double x) { return digamma(x + 1.0) - digamma(1.0); }

Complex beta_function(Complex a, Complex b) {
  return std::exp(log_gamma(a) + log_gamma(b) - log_gamma(a + b));
}

}  // namespace fragtree

#include "fragtree/polynomial.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fragtree {
namespace {

// Parlett-Reinsch style balancing with power-of-two scalings, applied to the
// whole row/column pair.
void balance(Eigen::MatrixXd& matrix) {
  const Eigen::Index n = matrix.rows();
  constexpr double kGain = 0.9;
  bool changed = true;
  while (changed) {
    changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double row_norm = matrix.row(i).lpNorm<1>();
      const double col_norm = matrix.col(i).lpNorm<1>();
      if (row_norm == 0.0 || col_norm == 0.0) continue;
      int exponent = 0;
      std::frexp(row_norm / col_norm, &exponent);
      exponent /= 2;
      if (exponent == 0) continue;
      const double scaled_col = std::ldexp(col_norm, exponent);
      const double scaled_row = std::ldexp(row_norm, -exponent);
      if (scaled_col + scaled_row < kGain * (col_norm + row_norm)) {
        changed = true;
        matrix.row(i) *= std::ldexp(1.0, -exponent);
        matrix.col(i) *= std::ldexp(1.0, exponent);
      }
    }
  }
}

}  // namespace

Polynomial::Polynomial(std::vector<double> coefficients) : coefficients_(std::move(coefficients)) {
  trim();
}

Polynomial Polynomial::from_real_roots(const std::vector<double>& roots) {
  Polynomial result({1.0});
  for (double r : roots) result = result * Polynomial({-r, 1.0});
  return result;
}

void Polynomial::trim() {
  while (coefficients_.size() > 1 && coefficients_.back() == 0.0) coefficients_.pop_back();
}

Complex Polynomial::operator()(Complex z) const {
  Complex value = 0.0;
  for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) value = value * z + *it;
  return value;
}

Complex Polynomial::derivative(Complex z) const {
  Complex value = 0.0;
  for (std::size_t k = coefficients_.size(); k-- > 1;) {
    value = value * z + static_cast<double>(k) * coefficients_[k];
  }
  return value;
}

Polynomial Polynomial::operator*(const Polynomial& other) const {
  if (coefficients_.empty() || other.coefficients_.empty()) return Polynomial();
  std::vector<double> out(coefficients_.size() + other.coefficients_.size() - 1, 0.0);
  for (std::size_t i = 0; i < coefficients_.size(); ++i) {
    for (std::size_t j = 0; j < other.coefficients_.size(); ++j) {
      out[i + j] += coefficients_[i] * other.coefficients_[j];
    }
  }
  return Polynomial(std::move(out));
}

Polynomial Polynomial::operator-(const Polynomial& other) const {
  std::vector<double> out(std::max(coefficients_.size(), other.coefficients_.size()), 0.0);
  for (std::size_t i = 0; i < coefficients_.size(); ++i) out[i] += coefficients_[i];
  for (std::size_t i = 0; i < other.coefficients_.size(); ++i) out[i] -= other.coefficients_[i];
  return Polynomial(std::move(out));
}

std::vector<Complex> Polynomial::roots() const {
  const int n = degree();
  if (n < 1) throw std::invalid_argument("Polynomial::roots: degree must be >= 1");
  const double lead = coefficients_.back();
  if (n == 1) return {Complex(-coefficients_[0] / lead, 0.0)};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  companion.diagonal(-1).setOnes();
  for (int i = 0; i < n; ++i) companion(i, n - 1) = -coefficients_[i] / lead;
  balance(companion);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("Polynomial::roots: eigenvalue iteration failed");
  }
  std::vector<Complex> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(solver.eigenvalues()[i]);
  return out;
}

}  // namespace fragtree

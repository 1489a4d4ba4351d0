#pragma once

#include <vector>

#include "fragtree/special_functions.hpp"

namespace fragtree {

/// Real polynomial, coefficients in ascending order of degree.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coefficients);

  /// prod_k (z - roots[k]) for real roots.
  static Polynomial from_real_roots(const std::vector<double>& roots);

  int degree() const { return static_cast<int>(coefficients_.size()) - 1; }
  const std::vector<double>& coefficients() const { return coefficients_; }

  Complex operator()(Complex z) const;
  Complex derivative(Complex z) const;

  Polynomial operator*(const Polynomial& other) const;
  Polynomial operator-(const Polynomial& other) const;

  /// All complex roots, as eigenvalues of the balanced companion matrix.
  std::vector<Complex> roots() const;

 private:
  void trim();
  std::vector<double> coefficients_;
};

}  // namespace fragtree

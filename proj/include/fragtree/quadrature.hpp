#pragma once

#include <functional>

namespace fragtree {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
};

/// Adaptive 15-point Gauss-Kronrod on [a, b] with relative tolerance.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double rel_tol = 1e-10, unsigned max_depth = 20);

}  // namespace fragtree

#include "fragtree/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace fragtree {

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double rel_tol, unsigned max_depth) {
  double error = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, max_depth, rel_tol, &error);
  return {value, error};
}

}  // namespace fragtree

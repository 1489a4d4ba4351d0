#pragma once

#include <complex>

namespace fragtree {

using Complex = std::complex<double>;

/// Principal-branch-free log-Gamma for complex arguments.
///
/// The imaginary part is only defined modulo 2*pi; callers that need a ratio
/// of Gamma values should exponentiate a difference of log_gamma values,
/// which is branch-independent. Uses the Stirling series after shifting the
/// argument to Re z >= 10, and the reflection formula for Re z < 0.5.
/// Throws std::domain_error at the poles z = 0, -1, -2, ...
Complex log_gamma(Complex z);

/// Digamma (logarithmic derivative of Gamma) for complex arguments.
Complex digamma(Complex z);

double digamma(double x);

/// Generalised harmonic number H_x = digamma(x + 1) - digamma(1).
double harmonic(double x);

/// Gamma(a) Gamma(b) / Gamma(a + b), evaluated through log_gamma.
Complex beta_function(Complex a, Complex b);

}  // namespace fragtree

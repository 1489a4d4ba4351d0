#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fragtree/split_law.hpp"

namespace fragtree {

class SpectralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonSimpleRootError : public SpectralError {
 public:
  using SpectralError::SpectralError;
};

class QuadratureFailure : public SpectralError {
 public:
  using SpectralError::SpectralError;
};

class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class RootMethod { CompanionMatrix, ArgumentPrinciple };

struct Root {
  Complex lambda;
  int multiplicity = 1;
  double residual = 0.0;  // |phi(lambda) - 1|
  Complex phi_prime;
  /// residual / |phi'| plus the transform error propagated the same way.
  double error_estimate = 0.0;
  /// |phi'(lambda)| > 1e-8 and a single zero inside a radius-1e-4 circle.
  bool simple_certified = false;
};

struct Strip {
  double delta = 0.05;
  double imag_bound = 60.0;
};

/// Roots of phi(lambda) = 1 in delta <= Re lambda <= 1, |Im lambda| <= imag_bound,
/// sorted by decreasing real part, then increasing |Im|, positive Im first.
struct Spectrum {
  std::vector<Root> roots;
  /// Rational phi only: every root of phi = 1 in the complex plane.
  std::vector<Root> full_plane_roots;
  Strip strip;
  RootMethod method = RootMethod::CompanionMatrix;
  double tol = 1e-10;
  bool closed_form = true;
  /// Zero count of the bounding contour (argument-principle path only).
  std::optional<int> contour_count;
  std::vector<std::string> warnings;
};

inline constexpr double kDefaultDelta = 0.05;
inline constexpr double kDefaultImagBound = 60.0;
inline constexpr double kDefaultRootTol = 1e-10;
inline constexpr double kConditioningThreshold = 1e-8;

Spectrum find_roots(const SplitLaw& law, double delta = kDefaultDelta,
                    double imag_bound = kDefaultImagBound, double tol = kDefaultRootTol);

enum class Phase { Normal, CriticalLine, Periodic, Degenerate };

std::string to_string(Phase phase);

struct LineRootCertificate {
  Complex lambda;
  bool simple = false;
};

struct PhaseReport {
  Phase phase = Phase::Normal;
  std::optional<Complex> lambda2;
  double sigma2 = 0.0;
  double tau2 = 0.0;
  /// Threshold tolerance used around Re lambda = 1/2.
  double tol = 1e-9;
  /// Roots sharing the real part of lambda_2.
  std::vector<LineRootCertificate> line_roots;
  bool near_boundary = false;
  std::string note;
};

PhaseReport classify_phase(const Spectrum& spectrum);

struct ExpansionTerm {
  Complex lambda;
  Complex coefficient;
};

struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

struct MomentModel {
  double alpha = 0.0;
  /// a_i = -1 / (lambda_i phi'(lambda_i)) for the roots in the strip.
  std::vector<ExpansionTerm> a_coeffs;
  /// Rational phi: the same coefficients for every root in the plane, which
  /// together with a0 give E N(x) exactly for x >= 1.
  std::vector<ExpansionTerm> exact_terms;
  std::optional<double> a0;
  std::optional<Estimate> beta;
  std::optional<Complex> gamma;
  std::optional<double> kappa;
  Phase phase = Phase::Normal;
  std::optional<Complex> lambda2;

  /// Exact mean for rational phi, otherwise the expansion over strip roots.
  double mean(double x) const;
};

MomentModel mean_expansion(const SplitLaw& law, const Spectrum& spectrum);

/// Asymptotic variance constant for Re lambda_2 < 1/2 from the integral over
/// the critical line Re z = 1/2.
Estimate beta_normal(const SplitLaw& law, const Spectrum& spectrum);

/// Same constant from the finite root sum available when phi is rational.
/// Cross moments use closed forms for the uniform binary split and Monte
/// Carlo over split vectors otherwise.
Estimate beta_rational(const SplitLaw& law, const MomentModel& model,
                       std::size_t mc_samples = SplitLaw::kDefaultMonteCarloSamples,
                       std::uint64_t seed = 0x5eed);

struct CriticalBeta {
  double value = 0.0;
  struct Term {
    Complex lambda;
    double psi;  // psi(lambda, conj(lambda)); zero flags a degenerate law
    double contribution;
  };
  std::vector<Term> terms;
};

/// x ln x variance constant for roots on Re lambda = 1/2.
CriticalBeta beta_critical(const SplitLaw& law, const Spectrum& spectrum, double line_tol = 1e-9);

struct VarianceTerm {
  Complex lambda_i;
  Complex lambda_k;
  Complex coefficient;
};

struct PeriodicVariance {
  std::vector<VarianceTerm> terms;
  /// Leading-order Var N(x).
  double predict(double x) const;
};

PeriodicVariance variance_periodic(const SplitLaw& law, const Spectrum& spectrum);

struct PhaseCrossing {
  double parameter = 0.0;
  double bracket_low = 0.0;
  double bracket_high = 0.0;
  int evaluations = 0;
};

/// Bisection for the family parameter at which Re lambda_2 crosses 1/2.
/// `make_law(p)` must be Normal at `low` and Periodic at `high` (or vice versa).
PhaseCrossing locate_phase_crossing(const std::function<SplitLaw(double)>& make_law, double low,
                                    double high, double parameter_tol = 1e-3,
                                    double delta = 0.3, double imag_bound = kDefaultImagBound);

/// Real part of lambda_2, or nullopt if lambda_1 = 1 is the only root.
std::optional<double> second_root_real_part(const SplitLaw& law, double delta = 0.3,
                                            double imag_bound = kDefaultImagBound);

}  // namespace fragtree

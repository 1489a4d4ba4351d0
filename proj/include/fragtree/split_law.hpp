#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fragtree/rng.hpp"
#include "fragtree/special_functions.hpp"

namespace fragtree {

enum class Family {
  BinaryUniform,
  MaryUniform,
  QuadSplit,
  SimplexSplit,
  Beta,
  Deterministic,
  LatticeDeterministic,
  EmpiricalSamples,
};

enum class LatticeKind { Lattice, NonLattice, Unknown };

/// Declared lattice structure. For lattice laws every weight is
/// base^(-exponents[j]) (zero weights carry exponent -1 and are skipped).
struct LatticeInfo {
  LatticeKind kind = LatticeKind::Unknown;
  double base = 0.0;
  std::vector<int> exponents;
};

enum class TransformMethod { ClosedForm, Quadrature, MonteCarlo, FiniteDifference };

struct TransformValue {
  Complex value;
  double error_bound = 0.0;  // upper bound on |value - exact|
  TransformMethod method = TransformMethod::ClosedForm;
};

class PoleError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class TransformDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class LawConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Distribution of the split vector (V_1, ..., V_b) on the standard simplex.
///
/// Immutable after construction; safe to share between threads. Each sampling
/// call takes the caller's generator.
class SplitLaw {
 public:
  static SplitLaw binary_uniform();
  static SplitLaw mary_uniform(int m);
  static SplitLaw quad_split(int d);
  static SplitLaw simplex_split(int d);
  static SplitLaw beta(double a, double a_prime);
  static SplitLaw deterministic(std::vector<double> weights);
  static SplitLaw lattice(double base, std::vector<int> exponents);
  /// `rows` holds n split vectors of equal length b, row-major.
  static SplitLaw empirical(std::vector<std::vector<double>> rows, std::string source_path = {});

  Family family() const { return family_; }
  int parts() const { return parts_; }
  /// m for MaryUniform, d for QuadSplit / SimplexSplit.
  int order() const { return order_; }
  double beta_a() const { return a_; }
  double beta_a_prime() const { return a_prime_; }
  const std::vector<double>& weights() const { return weights_; }
  const LatticeInfo& lattice_info() const { return lattice_; }
  LatticeKind lattice_kind() const { return lattice_.kind; }

  bool condition_a() const { return condition_a_; }
  bool condition_a_prime() const { return condition_a_prime_; }
  SplitLaw with_declared_conditions(bool condition_a, bool condition_a_prime) const;

  bool is_deterministic() const;
  /// phi extends to a rational function that the spectral module can solve
  /// through polynomial roots.
  bool has_rational_phi() const;
  /// V_j > 0 almost surely for every j.
  bool all_parts_positive() const;
  /// E |{j : V_j > 0}|.
  double positive_part_count() const;
  /// alpha = -phi'(1) from the family's closed form, when one is known.
  std::optional<double> alpha_closed_form() const;

  /// Mini-grammar spelling (`binary`, `mary:27`, `det:0.5,0.5`, ...).
  std::string spec_string() const;

  void sample(Rng& rng, std::span<double> out) const;
  std::vector<double> sample(Rng& rng) const;

  std::size_t empirical_rows() const;
  std::span<const double> empirical_row(std::size_t i) const;
  const std::string& source_path() const { return source_path_; }

  /// Sample count used by Monte Carlo transform fallbacks.
  static constexpr std::size_t kDefaultMonteCarloSamples = 1'000'000;

 private:
  SplitLaw() = default;

  Family family_ = Family::BinaryUniform;
  int parts_ = 2;
  int order_ = 0;
  double a_ = 1.0;
  double a_prime_ = 1.0;
  std::vector<double> weights_;
  LatticeInfo lattice_;
  bool condition_a_ = true;
  bool condition_a_prime_ = true;
  std::shared_ptr<const std::vector<double>> empirical_;
  std::string source_path_;
};

/// phi(z) = sum_j E V_j^z with 0^z := 0.
TransformValue phi(const SplitLaw& law, Complex z);

/// Derivative of phi. Closed forms where available; central differences with
/// one Richardson level otherwise.
TransformValue phi_prime(const SplitLaw& law, Complex z);

/// psi(z, w) = Cov(sum_j V_j^z, sum_k V_k^w).
TransformValue psi(const SplitLaw& law, Complex z, Complex w);

/// Monte Carlo estimate of phi over `n` sampled split vectors; independent of
/// the closed forms and used as their cross-check.
TransformValue monte_carlo_phi(const SplitLaw& law, Complex z, std::size_t n, Rng& rng);

TransformValue monte_carlo_psi(const SplitLaw& law, Complex z, Complex w, std::size_t n, Rng& rng);

/// Central difference with step h and 2h combined by one Richardson step.
/// error_bound is |D(h) - D(2h)| plus the propagated error of f. The
/// truncation error is O(h^4), so h = 1e-4 balances it against rounding.
TransformValue finite_difference_derivative(const std::function<TransformValue(Complex)>& f,
                                            Complex z, double step = 1e-4);

struct ConditionBReport {
  double delta = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;
  double sup_estimate = 0.0;
  /// Grid point of the supremum; ties broken towards phi closest to 1.
  double attained_at = 0.0;
  /// Always true: a finite grid scan is not a proof of Condition B.
  bool heuristic = true;
};

/// Scans |phi(delta + i t)| on t in [t_min, t_max] with the given step.
ConditionBReport check_condition_b(const SplitLaw& law, double delta, double t_max, double grid,
                                   double t_min = -1.0);

}  // namespace fragtree

#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fragtree/simulate.hpp"
#include "fragtree/spectral.hpp"
#include "fragtree/split_law.hpp"

namespace fragtree {

class InvalidCertificate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FixedPointNonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// xi = E sum_r |V_r^{lambda2}|^2 = phi(2 Re lambda2); the map T is a
/// contraction in l2 with constant sqrt(xi) when xi < 1.
struct ContractionCertificate {
  Complex lambda2;
  double xi = 0.0;
  double lipschitz_bound = 0.0;
  bool valid = false;
};

inline constexpr double kCertificateMargin = 1e-6;

ContractionCertificate contraction_certificate(const SplitLaw& law, Complex lambda2);

struct EmpiricalComplexMeasure {
  std::vector<Complex> samples;
  Complex declared_mean;
  int generation = 0;

  Complex mean() const;
  /// E |Z|^2 and E Z^2 over the samples.
  double abs_second_moment() const;
  Complex second_moment() const;
  /// sqrt(E|Z - mean|^2 / n).
  double standard_error() const;
};

/// One step of T: output sample i is sum_r V_r^{lambda2} Z_r with a fresh
/// split vector and Z_r drawn with replacement from the input, all from the
/// generator keyed derive_key(seed, i). Thread count does not affect output.
EmpiricalComplexMeasure apply_T(const EmpiricalComplexMeasure& measure, const SplitLaw& law,
                                Complex lambda2, std::uint64_t seed, int threads = 0);

struct FixedPointOptions {
  std::size_t n_samples = 100'000;
  int max_gen = 200;
  /// Stop once mean, E|Z|^2 and E Z^2 move by less than tol * E|Z|^2 (or by
  /// less than their Monte Carlo noise).
  double tol = 1e-3;
  std::uint64_t seed = 0x5eed;
  int threads = 0;
  bool recentre = true;
};

struct GenerationTrace {
  int generation = 0;
  /// Mean before recentring; the map preserves it in expectation.
  Complex raw_mean;
  double raw_mean_standard_error = 0.0;
  double abs_second_moment = 0.0;
  /// Standard error of E|Z|^2, also used as the noise scale for E Z^2.
  double second_moment_standard_error = 0.0;
  Complex second_moment;
};

struct FixedPointResult {
  EmpiricalComplexMeasure measure;
  ContractionCertificate certificate;
  std::vector<GenerationTrace> trace;
  bool converged = false;
  /// Sliced transport distance between the last two generations.
  double final_transport = 0.0;
};

/// Iterates T from the point mass at gamma. At least ceil(ln tol / ln xi)
/// generations run before the moment-based stop is consulted.
FixedPointResult iterate_to_fixed_point(const SplitLaw& law, Complex lambda2, Complex gamma,
                                        const FixedPointOptions& options = {});

/// Second moments of the fixed point implied by expanding the square in the
/// map: E|X|^2 = (psi(l, conj l) + 1 - xi) |gamma|^2 / (1 - xi) and
/// E X^2 = (psi(l, l) + 1 - phi(2 l)) gamma^2 / (1 - phi(2 l)).
struct FixedPointMoments {
  double abs_second_moment = 0.0;
  Complex second_moment;
};
FixedPointMoments fixed_point_moments(const SplitLaw& law, Complex lambda2, Complex gamma);

/// Transport distance between (N_i - x / alpha) / x^{sigma2} over the raw
/// ensemble values and Re(Xi_j e^{i tau2 ln x}) over the fixed-point samples.
double periodic_limit_distance(const SimulationEnsemble& ensemble,
                               const EmpiricalComplexMeasure& fixed_point, const MomentModel& model);

}  // namespace fragtree

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fragtree/simulate.hpp"
#include "fragtree/spectral.hpp"

namespace fragtree {

class InsufficientRange : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TestRecord {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::uint64_t sample_size = 0;
  std::uint64_t seed = 0;
  std::string note;
};

struct VerificationReport {
  std::string law_hash;
  std::string law_spec;
  std::string phase_claimed;
  std::string phase_detected;
  std::vector<TestRecord> records;

  bool all_passed() const;
};

double standard_normal_cdf(double x);

/// sup |F_n - Phi| of the sample against the standard normal.
double ks_distance_normal(std::vector<double> sample);

/// 1 - alpha quantiles of the KS distance and of |excess kurtosis| for exact
/// normal samples of size n, estimated from `trials` simulated samples.
struct NormalCalibration {
  std::size_t n = 0;
  std::size_t trials = 0;
  double quantile = 0.99;
  double ks = 0.0;
  double kurtosis = 0.0;
  double skewness = 0.0;
};
NormalCalibration calibrate_normal_thresholds(std::size_t n, std::size_t trials, double quantile,
                                              std::uint64_t seed);

enum class CltScaling { SqrtX, SqrtXLogX };

struct CltResult {
  double ks = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  std::size_t n = 0;
  /// The standardised values.
  std::vector<double> standardized;
};

/// Standardises raw values by (N - x / alpha) / sqrt(beta x) (or
/// sqrt(beta x ln x)) and measures the distance to N(0, 1).
CltResult clt_test(const SimulationEnsemble& ensemble, const MomentModel& model, CltScaling scaling,
                   double beta);

enum class VarianceModel { Linear, XLogX, Periodic };
std::string to_string(VarianceModel model);

struct VarianceFit {
  VarianceModel model = VarianceModel::Linear;
  /// c for Linear / XLogX; (c0, c1, c2) for Periodic.
  std::vector<double> coefficients;
  double chi2 = 0.0;
  /// chi2 + 2 * number of parameters.
  double score = 0.0;
};

struct VarianceSelection {
  VarianceModel selected = VarianceModel::Linear;
  std::vector<VarianceFit> fits;
  const VarianceFit& best() const;
};

struct VariancePoint {
  double x = 0.0;
  double variance = 0.0;
  double standard_error = 0.0;
};

/// Sample variance and its standard error (from the fourth central moment).
VariancePoint variance_point(const SimulationEnsemble& ensemble);

/// Weighted least-squares fits of Var N(x) against c x, c x ln x and
/// x^{2 sigma2}(c0 + c1 cos(2 tau2 ln x) + c2 sin(2 tau2 ln x)); the
/// oscillatory model is only offered when the spectrum has a second root with
/// Re > 1/2. Requires >= 6 points spanning >= 3 decades.
VarianceSelection variance_scaling_fit(const std::vector<VariancePoint>& points,
                                       const Spectrum& spectrum);

struct OscillationFit {
  double amplitude = 0.0;
  double amplitude_error = 0.0;
  double phase = 0.0;
  /// Frequency of the best free-frequency fit.
  double free_tau = 0.0;
  /// Amplitude smaller than twice its standard error.
  bool inconclusive = false;
  double gamma_amplitude = 0.0;
  double gamma_phase = 0.0;
};

/// Fits A cos(tau2 ln x + phi0) to (mean - x / alpha) / x^{sigma2} and
/// compares (A, phi0) with the polar form of gamma.
OscillationFit oscillation_probe(const std::vector<SimulationEnsemble>& ensembles,
                                 const MomentModel& model);

/// `per_period` points per period of tau ln x over `periods` periods from x_low.
std::vector<double> phase_spread_grid(double x_low, double tau, int per_period = 8, int periods = 3);

}  // namespace fragtree

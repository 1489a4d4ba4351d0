#include "fragtree/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "fragtree/moments.hpp"
#include "fragtree/rng.hpp"

namespace fragtree {
namespace {

struct LeastSquares {
  std::vector<double> coefficients;
  std::vector<double> standard_errors;
  double chi2 = 0.0;
};

// Weighted least squares y ~ A c with weights 1 / sigma^2.
LeastSquares weighted_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& sigma) {
  Eigen::MatrixXd a = design;
  Eigen::VectorXd b = y;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    a.row(i) /= sigma(i);
    b(i) /= sigma(i);
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  const Eigen::VectorXd c = qr.solve(b);
  LeastSquares out;
  out.coefficients.assign(c.data(), c.data() + c.size());
  out.chi2 = (a * c - b).squaredNorm();
  const Eigen::MatrixXd cov = (a.transpose() * a).inverse();
  for (Eigen::Index k = 0; k < c.size(); ++k) out.standard_errors.push_back(std::sqrt(cov(k, k)));
  return out;
}

double quantile_of(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double position = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(position));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (position - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace

bool VerificationReport::all_passed() const {
  return std::all_of(records.begin(), records.end(), [](const TestRecord& r) { return r.pass; });
}

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double ks_distance_normal(std::vector<double> sample) {
  if (sample.empty()) throw std::invalid_argument("ks_distance_normal: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = standard_normal_cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

NormalCalibration calibrate_normal_thresholds(std::size_t n, std::size_t trials, double quantile,
                                              std::uint64_t seed) {
  if (n < 2 || trials < 1) throw std::invalid_argument("calibrate_normal_thresholds: need n >= 2");
  std::vector<double> ks, kurt, skew;
  std::vector<double> sample(n);
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(derive_key(seed, t));
    MomentAccumulator acc;
    for (double& v : sample) {
      v = rng.normal();
      acc.add(v);
    }
    ks.push_back(ks_distance_normal(sample));
    kurt.push_back(std::abs(acc.excess_kurtosis().value_or(0.0)));
    skew.push_back(std::abs(acc.skewness().value_or(0.0)));
  }
  NormalCalibration c;
  c.n = n;
  c.trials = trials;
  c.quantile = quantile;
  c.ks = quantile_of(ks, quantile);
  c.kurtosis = quantile_of(kurt, quantile);
  c.skewness = quantile_of(skew, quantile);
  return c;
}

CltResult clt_test(const SimulationEnsemble& ensemble, const MomentModel& model, CltScaling scaling,
                   double beta) {
  if (model.phase != Phase::Normal && model.phase != Phase::CriticalLine) {
    throw PreconditionError("clt_test: needs the Normal or CriticalLine phase");
  }
  if (ensemble.raw.empty()) throw PreconditionError("clt_test: ensemble kept no raw values");
  if (!(beta > 0.0)) throw PreconditionError("clt_test: beta must be positive");
  const double x = ensemble.x;
  double scale = beta * x;
  if (scaling == CltScaling::SqrtXLogX) scale *= std::log(x);
  scale = std::sqrt(scale);
  CltResult out;
  out.n = ensemble.raw.size();
  MomentAccumulator acc;
  out.standardized.reserve(out.n);
  for (double value : ensemble.raw) {
    const double z = (value - x / model.alpha) / scale;
    out.standardized.push_back(z);
    acc.add(z);
  }
  out.ks = ks_distance_normal(out.standardized);
  out.skewness = acc.skewness().value_or(0.0);
  out.excess_kurtosis = acc.excess_kurtosis().value_or(0.0);
  return out;
}

std::string to_string(VarianceModel model) {
  switch (model) {
    case VarianceModel::Linear: return "c*x";
    case VarianceModel::XLogX: return "c*x*ln(x)";
    case VarianceModel::Periodic: return "x^(2*sigma2)*periodic";
  }
  return {};
}

const VarianceFit& VarianceSelection::best() const {
  for (const auto& fit : fits) {
    if (fit.model == selected) return fit;
  }
  throw std::logic_error("VarianceSelection: selected model missing");
}

VariancePoint variance_point(const SimulationEnsemble& ensemble) {
  const auto& acc = ensemble.internal;
  const auto var = acc.variance();
  if (!var) throw InsufficientRange("variance_point: need at least two replicates");
  const double n = static_cast<double>(acc.count());
  const double s4 = acc.central_moment2() * acc.central_moment2();
  const double var_of_var = std::max(0.0, (acc.central_moment4() - s4 * (n - 3.0) / (n - 1.0)) / n);
  return {ensemble.x, *var, std::sqrt(var_of_var)};
}

VarianceSelection variance_scaling_fit(const std::vector<VariancePoint>& points,
                                       const Spectrum& spectrum) {
  if (points.size() < 6) throw InsufficientRange("variance_scaling_fit: need at least 6 x values");
  double lo = INFINITY;
  double hi = 0.0;
  for (const auto& p : points) {
    lo = std::min(lo, p.x);
    hi = std::max(hi, p.x);
    if (!(p.standard_error > 0.0)) throw InsufficientRange("variance_scaling_fit: zero standard error");
  }
  if (!(hi >= 1000.0 * lo)) throw InsufficientRange("variance_scaling_fit: x grid spans < 3 decades");

  const auto rows = static_cast<Eigen::Index>(points.size());
  Eigen::VectorXd y(rows), sigma(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    y(i) = points[static_cast<std::size_t>(i)].variance;
    sigma(i) = points[static_cast<std::size_t>(i)].standard_error;
  }
  VarianceSelection out;
  auto record = [&out](VarianceModel model, const LeastSquares& ls) {
    const double k = static_cast<double>(ls.coefficients.size());
    out.fits.push_back({model, ls.coefficients, ls.chi2, ls.chi2 + 2.0 * k});
  };
  Eigen::MatrixXd linear(rows, 1), xlogx(rows, 1);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double x = points[static_cast<std::size_t>(i)].x;
    linear(i, 0) = x;
    xlogx(i, 0) = x * std::log(x);
  }
  record(VarianceModel::Linear, weighted_fit(linear, y, sigma));
  record(VarianceModel::XLogX, weighted_fit(xlogx, y, sigma));
  if (spectrum.roots.size() >= 2 && spectrum.roots[1].lambda.real() > 0.5) {
    const double sigma2 = spectrum.roots[1].lambda.real();
    const double tau2 = std::abs(spectrum.roots[1].lambda.imag());
    Eigen::MatrixXd periodic(rows, 3);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double x = points[static_cast<std::size_t>(i)].x;
      const double power = std::pow(x, 2.0 * sigma2);
      periodic(i, 0) = power;
      periodic(i, 1) = power * std::cos(2.0 * tau2 * std::log(x));
      periodic(i, 2) = power * std::sin(2.0 * tau2 * std::log(x));
    }
    record(VarianceModel::Periodic, weighted_fit(periodic, y, sigma));
  }
  const auto best = std::min_element(out.fits.begin(), out.fits.end(),
                                     [](const VarianceFit& a, const VarianceFit& b) { return a.score < b.score; });
  out.selected = best->model;
  return out;
}

OscillationFit oscillation_probe(const std::vector<SimulationEnsemble>& ensembles,
                                 const MomentModel& model) {
  if (model.phase != Phase::Periodic || !model.lambda2 || !model.gamma) {
    throw PreconditionError("oscillation_probe: model is not in the Periodic phase");
  }
  if (ensembles.size() < 3) throw InsufficientRange("oscillation_probe: need at least 3 x values");
  const double sigma2 = model.lambda2->real();
  const double tau2 = model.lambda2->imag();
  const auto rows = static_cast<Eigen::Index>(ensembles.size());
  Eigen::VectorXd y(rows), sigma(rows), logx(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& e = ensembles[static_cast<std::size_t>(i)];
    const double scale = std::pow(e.x, sigma2);
    y(i) = (e.internal.mean() - e.x / model.alpha) / scale;
    sigma(i) = std::max(e.internal.standard_error().value_or(0.0) / scale, 1e-12);
    logx(i) = std::log(e.x);
  }
  auto fit_at = [&](double tau) {
    Eigen::MatrixXd design(rows, 2);
    for (Eigen::Index i = 0; i < rows; ++i) {
      design(i, 0) = std::cos(tau * logx(i));
      design(i, 1) = std::sin(tau * logx(i));
    }
    return weighted_fit(design, y, sigma);
  };
  OscillationFit out;
  const LeastSquares fixed = fit_at(tau2);
  const double p = fixed.coefficients[0];
  const double q = fixed.coefficients[1];
  // p cos + q sin = A cos(tau ln x + phi0) with p = A cos phi0, q = -A sin phi0.
  out.amplitude = std::hypot(p, q);
  out.phase = std::atan2(-q, p);
  out.amplitude_error = std::hypot(fixed.standard_errors[0], fixed.standard_errors[1]) / std::numbers::sqrt2;
  out.inconclusive = out.amplitude < 2.0 * out.amplitude_error;
  out.gamma_amplitude = std::abs(*model.gamma);
  out.gamma_phase = std::arg(*model.gamma);

  // Free-frequency fit: coarse scan, then golden-section refinement.
  auto chi2_at = [&](double tau) { return fit_at(tau).chi2; };
  double best_tau = tau2;
  double best_chi2 = chi2_at(tau2);
  const int steps = 400;
  for (int s = 0; s <= steps; ++s) {
    const double tau = tau2 * (0.5 + static_cast<double>(s) / steps);
    const double c = chi2_at(tau);
    if (c < best_chi2) {
      best_chi2 = c;
      best_tau = tau;
    }
  }
  double a = best_tau - tau2 / steps;
  double b = best_tau + tau2 / steps;
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 60; ++it) {
    const double c1 = b - ratio * (b - a);
    const double c2 = a + ratio * (b - a);
    if (chi2_at(c1) < chi2_at(c2)) {
      b = c2;
    } else {
      a = c1;
    }
  }
  out.free_tau = 0.5 * (a + b);
  return out;
}

std::vector<double> phase_spread_grid(double x_low, double tau, int per_period, int periods) {
  if (!(tau > 0.0) || per_period < 1 || periods < 1) {
    throw std::invalid_argument("phase_spread_grid: bad arguments");
  }
  std::vector<double> xs;
  const int count = per_period * periods;
  for (int j = 0; j < count; ++j) {
    xs.push_back(x_low * std::exp(2.0 * std::numbers::pi * j / (per_period * tau)));
  }
  return xs;
}

}  // namespace fragtree

#include "fragtree/fixedpoint.hpp"

#include <algorithm>
#include <cmath>

#include "fragtree/parallel.hpp"
#include "fragtree/rng.hpp"
#include "fragtree/transport.hpp"

namespace fragtree {
namespace {

// Fills out[r] = V_r^lambda for one split vector (0^lambda := 0).
class SplitPowers {
 public:
  SplitPowers(const SplitLaw& law, Complex lambda)
      : law_(law), lambda_(lambda), v_(static_cast<std::size_t>(law.parts())) {}

  void draw(Rng& rng, std::vector<Complex>& out) {
    out.resize(v_.size());
    if (law_.family() == Family::QuadSplit) {
      // Products of per-axis factors: d pairs of powers instead of 2^d.
      out[0] = 1.0;
      std::size_t filled = 1;
      for (int k = 0; k < law_.order(); ++k) {
        const double u = rng.uniform();
        const Complex left = std::exp(lambda_ * std::log(u));
        const Complex right = std::exp(lambda_ * std::log1p(-u));
        for (std::size_t j = 0; j < filled; ++j) {
          out[filled + j] = out[j] * right;
          out[j] *= left;
        }
        filled *= 2;
      }
      return;
    }
    law_.sample(rng, v_);
    for (std::size_t r = 0; r < v_.size(); ++r) {
      out[r] = v_[r] > 0.0 ? std::exp(lambda_ * std::log(v_[r])) : Complex(0.0, 0.0);
    }
  }

 private:
  const SplitLaw& law_;
  Complex lambda_;
  std::vector<double> v_;
};

constexpr std::size_t kSamplesPerChunk = 4096;

GenerationTrace describe(const EmpiricalComplexMeasure& m) {
  GenerationTrace t;
  t.generation = m.generation;
  t.raw_mean = m.mean();
  t.raw_mean_standard_error = m.standard_error();
  t.abs_second_moment = m.abs_second_moment();
  t.second_moment = m.second_moment();
  if (m.samples.size() > 1) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (Complex z : m.samples) {
      sum += std::norm(z);
      sum_sq += std::norm(z) * std::norm(z);
    }
    const double n = static_cast<double>(m.samples.size());
    const double var = std::max(0.0, sum_sq / n - (sum / n) * (sum / n));
    t.second_moment_standard_error = std::sqrt(var / (n - 1.0));
  }
  return t;
}

}  // namespace

ContractionCertificate contraction_certificate(const SplitLaw& law, Complex lambda2) {
  ContractionCertificate c;
  c.lambda2 = lambda2;
  c.xi = phi(law, 2.0 * lambda2.real()).value.real();
  c.lipschitz_bound = std::sqrt(std::max(0.0, c.xi));
  c.valid = c.xi < 1.0 - kCertificateMargin;
  return c;
}

Complex EmpiricalComplexMeasure::mean() const {
  Complex s = 0.0;
  for (Complex z : samples) s += z;
  return samples.empty() ? s : s / static_cast<double>(samples.size());
}

double EmpiricalComplexMeasure::abs_second_moment() const {
  double s = 0.0;
  for (Complex z : samples) s += std::norm(z);
  return samples.empty() ? s : s / static_cast<double>(samples.size());
}

Complex EmpiricalComplexMeasure::second_moment() const {
  Complex s = 0.0;
  for (Complex z : samples) s += z * z;
  return samples.empty() ? s : s / static_cast<double>(samples.size());
}

double EmpiricalComplexMeasure::standard_error() const {
  if (samples.size() < 2) return 0.0;
  const Complex mu = mean();
  double s = 0.0;
  for (Complex z : samples) s += std::norm(z - mu);
  const double n = static_cast<double>(samples.size());
  return std::sqrt(s / (n - 1.0) / n);
}

EmpiricalComplexMeasure apply_T(const EmpiricalComplexMeasure& measure, const SplitLaw& law,
                                Complex lambda2, std::uint64_t seed, int threads) {
  if (measure.samples.empty()) throw std::invalid_argument("apply_T: empty input measure");
  const std::size_t n = measure.samples.size();
  EmpiricalComplexMeasure out;
  out.declared_mean = measure.declared_mean;
  out.generation = measure.generation + 1;
  out.samples.resize(n);
  const std::size_t chunks = (n + kSamplesPerChunk - 1) / kSamplesPerChunk;
  parallel_chunks(chunks, resolve_threads(threads), [&](std::size_t c) {
    SplitPowers powers(law, lambda2);
    std::vector<Complex> a;
    const std::size_t end = std::min(n, (c + 1) * kSamplesPerChunk);
    for (std::size_t i = c * kSamplesPerChunk; i < end; ++i) {
      Rng rng(derive_key(seed, i));
      powers.draw(rng, a);
      Complex total = 0.0;
      for (const Complex& weight : a) {
        const auto pick = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
        total += weight * measure.samples[std::min(pick, n - 1)];
      }
      out.samples[i] = total;
    }
  });
  return out;
}

FixedPointResult iterate_to_fixed_point(const SplitLaw& law, Complex lambda2, Complex gamma,
                                        const FixedPointOptions& options) {
  FixedPointResult result;
  result.certificate = contraction_certificate(law, lambda2);
  if (!result.certificate.valid) {
    throw InvalidCertificate("iterate_to_fixed_point: xi = phi(2 Re lambda2) is not below 1");
  }
  if (options.n_samples < 2) throw std::invalid_argument("iterate_to_fixed_point: need n_samples >= 2");
  EmpiricalComplexMeasure current;
  current.declared_mean = gamma;
  current.samples.assign(options.n_samples, gamma);
  const int min_gen = std::max(
      2, static_cast<int>(std::ceil(std::log(options.tol) / std::log(result.certificate.xi))));

  EmpiricalComplexMeasure previous;
  for (int g = 1; g <= options.max_gen; ++g) {
    previous = std::move(current);
    current = apply_T(previous, law, lambda2, derive_key(options.seed, static_cast<std::uint64_t>(g)),
                      options.threads);
    result.trace.push_back(describe(current));
    if (options.recentre) {
      const Complex shift = gamma - current.mean();
      for (Complex& z : current.samples) z += shift;
    }
    if (g < min_gen) continue;
    const GenerationTrace& now = result.trace.back();
    const GenerationTrace& before = result.trace[result.trace.size() - 2];
    // A change counts as settled when it is below tol relative to E|Z|^2 or
    // within three standard errors of generation-to-generation noise.
    const double scale = std::max(now.abs_second_moment, 1e-300);
    const double noise = 3.0 * std::sqrt(2.0) * now.second_moment_standard_error;
    const double mean_noise = 3.0 * std::sqrt(2.0) * now.raw_mean_standard_error;
    const bool settled =
        std::abs(now.raw_mean - before.raw_mean) < std::max(options.tol * std::sqrt(scale), mean_noise) &&
        std::abs(now.abs_second_moment - before.abs_second_moment) < std::max(options.tol * scale, noise) &&
        std::abs(now.second_moment - before.second_moment) < std::max(options.tol * scale, noise);
    if (settled) {
      result.converged = true;
      break;
    }
  }
  result.final_transport = sliced_wasserstein2(previous.samples, current.samples);
  result.measure = std::move(current);
  if (!result.converged) {
    throw FixedPointNonConvergence("iterate_to_fixed_point: moments still moving after max_gen");
  }
  return result;
}

FixedPointMoments fixed_point_moments(const SplitLaw& law, Complex lambda2, Complex gamma) {
  const double xi = phi(law, 2.0 * lambda2.real()).value.real();
  const double psi_bar = psi(law, lambda2, std::conj(lambda2)).value.real();
  const Complex phi_double = phi(law, 2.0 * lambda2).value;
  const Complex psi_same = psi(law, lambda2, lambda2).value;
  FixedPointMoments m;
  m.abs_second_moment = (psi_bar + 1.0 - xi) * std::norm(gamma) / (1.0 - xi);
  m.second_moment = (psi_same + 1.0 - phi_double) * gamma * gamma / (1.0 - phi_double);
  return m;
}

double periodic_limit_distance(const SimulationEnsemble& ensemble,
                               const EmpiricalComplexMeasure& fixed_point, const MomentModel& model) {
  if (model.phase != Phase::Periodic || !model.lambda2) {
    throw PreconditionError("periodic_limit_distance: model is not in the Periodic phase");
  }
  if (ensemble.raw.empty()) throw PreconditionError("periodic_limit_distance: ensemble kept no raw values");
  const double x = ensemble.x;
  const double sigma2 = model.lambda2->real();
  const double tau2 = model.lambda2->imag();
  const double scale = std::pow(x, sigma2);
  std::vector<double> rescaled;
  rescaled.reserve(ensemble.raw.size());
  for (double n : ensemble.raw) rescaled.push_back((n - x / model.alpha) / scale);
  const Complex rotation = std::polar(1.0, tau2 * std::log(x));
  std::vector<double> target;
  target.reserve(fixed_point.samples.size());
  for (Complex z : fixed_point.samples) target.push_back((z * rotation).real());
  return wasserstein2(std::move(rescaled), std::move(target));
}

}  // namespace fragtree

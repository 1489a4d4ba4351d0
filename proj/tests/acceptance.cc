// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include "fragtree/fixedpoint.hpp"
#include "fragtree/renewal.hpp"
#include "fragtree/simulate.hpp"
#include "fragtree/spectral.hpp"
#include "fragtree/stats.hpp"

using namespace fragtree;

namespace {

constexpr std::uint64_t kSeed = 20240917;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

int failures = 0;

void criterion(int id, const char* title, double budget_seconds, const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail << "exception: " << e.what();
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.require(seconds < budget_seconds, "runtime budget");
  if (!out.pass) ++failures;
  std::printf("%s AC%d %s (%.1fs) %s\n", out.pass ? "PASS" : "FAIL", id, title, seconds, out.detail.str().c_str());
  std::fflush(stdout);
}

double one(double t) { return t >= 0.0 ? 1.0 : 0.0; }

void exact_binary_mean(Outcome& out) {
  const SplitLaw law = SplitLaw::binary_uniform();
  for (double x : {2.5, 10.0, 1e3}) {
    const SimulationEnsemble e = ensemble(law, x, 100'000, derive_key(kSeed, static_cast<std::uint64_t>(x * 10)));
    const double z = (e.internal.mean() - (2.0 * x - 1.0)) / *e.internal.standard_error();
    out.detail << "x=" << x << " z=" << z << "; ";
    out.require(std::abs(z) < 3.0, "simulated mean at x=" + std::to_string(x));
  }
  Rng rng(kSeed);
  const MeasureGrid grid = discretize_measure(law, 1e-3, 7.5, 0, rng);
  const RenewalSolution s = solve_renewal(grid, one);
  for (double x : {2.5, 10.0, 1e3}) {
    const double rel = std::abs(s.at(std::log(x)) / (2.0 * x - 1.0) - 1.0);
    out.detail << "renewal rel err " << rel << "; ";
    out.require(rel < 0.02, "renewal mean");
  }
}

void variance_constant(Outcome& out) {
  const SplitLaw law = SplitLaw::binary_uniform();
  const Spectrum spectrum = find_roots(law);
  const double exact = 8.0 * std::log(2.0) - 5.0;
  const Estimate quad = beta_normal(law, spectrum);
  const Estimate rational = beta_rational(law, mean_expansion(law, spectrum));
  out.detail << "beta_normal=" << quad.value << " beta_rational=" << rational.value << "; ";
  out.require(std::abs(quad.value - exact) < 1e-4, "beta_normal");
  out.require(std::abs(rational.value - exact) < 1e-8, "beta_rational");
  const SimulationEnsemble e = ensemble(law, 1e4, 100'000, derive_key(kSeed, 2));
  const double ratio = *e.internal.variance() / 1e4;
  out.detail << "Var N(1e4)/1e4=" << ratio;
  out.require(std::abs(ratio / exact - 1.0) < 0.05, "Monte Carlo variance");
}

void mary_threshold(Outcome& out) {
  for (int m : {26, 27}) {
    const Spectrum s = find_roots(SplitLaw::mary_uniform(m));
    const double sigma2 = s.roots.at(1).lambda.real();
    double worst = 0.0;
    for (const Root& r : s.roots) worst = std::max(worst, r.residual);
    out.detail << "m=" << m << " Re l2=" << sigma2 << " max residual=" << worst << "; ";
    out.require(m == 26 ? sigma2 < 0.5 : sigma2 > 0.5, "threshold side");
    out.require(worst <= 1e-9, "residual");
  }
}

void quad_spectrum(Outcome& out) {
  double worst = 0.0;
  Phase previous = Phase::Normal;
  int flip = -1;
  for (int d = 2; d <= 12; ++d) {
    const Spectrum s = find_roots(SplitLaw::quad_split(d));
    // Every root 2 e^{2 pi i k / d} - 1 inside the strip must be found.
    std::size_t expected = 0;
    for (int k = 0; k < d; ++k) {
      const Complex target = 2.0 * std::exp(Complex(0.0, 2.0 * std::numbers::pi * k / d)) - 1.0;
      if (target.real() < s.strip.delta || std::abs(target.imag()) > s.strip.imag_bound) continue;
      ++expected;
      double nearest = INFINITY;
      for (const Root& r : s.roots) nearest = std::min(nearest, std::abs(r.lambda - target));
      worst = std::max(worst, nearest);
    }
    out.require(expected == s.roots.size(), "root count d=" + std::to_string(d));
    const Phase phase = classify_phase(s).phase;
    if (phase == Phase::Periodic && previous == Phase::Normal) flip = d;
    previous = phase;
  }
  out.detail << "max root error=" << worst << " flip at d=" << flip;
  out.require(worst <= 1e-10, "root accuracy");
  out.require(flip == 9, "phase flip between 8 and 9");
}

void alpha_identities(Outcome& out) {
  double worst = 0.0;
  for (const SplitLaw& law : {SplitLaw::binary_uniform(), SplitLaw::mary_uniform(3), SplitLaw::mary_uniform(27),
                              SplitLaw::quad_split(2), SplitLaw::quad_split(9), SplitLaw::beta(2.0, 2.0),
                              SplitLaw::beta(26.9, 1.0), SplitLaw::beta(0.5, 3.0), SplitLaw::beta(59.6, 59.6)}) {
    const double closed = *law.alpha_closed_form();
    const double numeric = -finite_difference_derivative([&law](Complex z) { return phi(law, z); }, 1.0).value.real();
    worst = std::max(worst, std::abs(closed - numeric));
  }
  out.require(std::abs(*SplitLaw::binary_uniform().alpha_closed_form() - 0.5) < 1e-15, "binary alpha");
  out.require(std::abs(*SplitLaw::quad_split(7).alpha_closed_form() - 3.5) < 1e-15, "quad alpha");
  out.require(std::abs(*SplitLaw::mary_uniform(4).alpha_closed_form() - (1.0 / 2 + 1.0 / 3 + 1.0 / 4)) < 1e-14,
              "mary alpha");
  out.detail << "max |alpha - (-phi'(1))|=" << worst;
  out.require(worst < 1e-8, "alpha identity");
}

void deterministic_identities(Outcome& out) {
  const double tau = std::numbers::phi;
  const SplitLaw golden = SplitLaw::deterministic({1.0 / tau, 1.0 / (tau * tau)});
  std::uint64_t fib[40] = {0, 1, 1};
  for (int k = 3; k < 40; ++k) fib[k] = fib[k - 1] + fib[k - 2];
  int mismatches = 0;
  for (int n = 0; n <= 30; ++n) {
    const double x = std::pow(tau, n);
    if (run_once(golden, x, kSeed).n_internal != fib[n + 3] - 1) ++mismatches;
  }
  out.detail << "Fibonacci mismatches=" << mismatches << "; ";
  out.require(mismatches == 0, "N(tau^n) = F_{n+3} - 1");
  const SplitLaw thirds = SplitLaw::deterministic({1.0 / 3.0, 2.0 / 3.0});
  const double ratio = static_cast<double>(run_deterministic(thirds, 1e6).n_internal) / 1e6;
  const double target = 1.0 / (std::log(3.0) - (2.0 / 3.0) * std::log(2.0));
  out.detail << "N(1e6)/1e6=" << ratio << " target=" << target;
  out.require(std::abs(ratio / target - 1.0) < 0.02, "(1/3, 2/3) ratio");
}

void external_identity(Outcome& out) {
  const SplitLaw laws[] = {SplitLaw::binary_uniform(), SplitLaw::mary_uniform(5), SplitLaw::mary_uniform(27),
                           SplitLaw::quad_split(3),    SplitLaw::quad_split(9),  SplitLaw::simplex_split(3),
                           SplitLaw::beta(2.0, 3.0),   SplitLaw::beta(27.0, 1.0),
                           SplitLaw::deterministic({0.2, 0.3, 0.5}), SplitLaw::lattice(2.0, {1, 2, 2})};
  constexpr std::uint64_t kRunsPerLaw = 100'000;
  std::uint64_t runs = 0;
  std::uint64_t failures_found = 0;
  std::uint64_t index = 0;
  for (const SplitLaw& law : laws) {
    const SimulationEnsemble e = ensemble(law, 30.0, kRunsPerLaw, derive_key(kSeed, 700 + index++));
    runs += e.n;
    failures_found += e.external_identity_failures;
  }
  out.detail << "runs=" << runs << " violations=" << failures_found;
  out.require(runs >= 1'000'000, "run count");
  out.require(failures_found == 0, "external identity");
}

void clt_binary(Outcome& out) {
  const SplitLaw law = SplitLaw::binary_uniform();
  const MomentModel model = mean_expansion(law, find_roots(law));
  const double beta = 8.0 * std::log(2.0) - 5.0;
  const NormalCalibration cal = calibrate_normal_thresholds(10'000, 200, 0.99, derive_key(kSeed, 8));
  EnsembleOptions options;
  options.keep_raw = true;
  const SimulationEnsemble e = ensemble(law, 1e5, 10'000, derive_key(kSeed, 9), options);
  const CltResult r = clt_test(e, model, CltScaling::SqrtX, beta);
  out.detail << "KS=" << r.ks << " (normal 99%: " << cal.ks << ") excess kurtosis=" << r.excess_kurtosis
             << " (normal 99%: " << cal.kurtosis << ")";
  out.require(cal.ks < 0.02 && cal.kurtosis < 0.2, "calibrated thresholds admit the fixed bounds");
  out.require(r.ks < 0.02, "KS distance");
  out.require(std::abs(r.excess_kurtosis) < 0.2, "excess kurtosis");
}

void periodic_phase(Outcome& out) {
  const SplitLaw law = SplitLaw::quad_split(9);
  const Spectrum spectrum = find_roots(law);
  const MomentModel model = mean_expansion(law, spectrum);
  const Complex lambda2 = *model.lambda2;
  const ContractionCertificate cert = contraction_certificate(law, lambda2);
  out.detail << "xi=" << cert.xi << "; ";
  out.require(cert.valid && cert.xi < 1.0, "contraction certificate");
  FixedPointOptions fp;
  fp.n_samples = 20'000;
  fp.seed = derive_key(kSeed, 10);
  const FixedPointResult fixed = iterate_to_fixed_point(law, lambda2, *model.gamma, fp);
  const GenerationTrace& last = fixed.trace.back();
  const double mean_gap = std::abs(last.raw_mean - *model.gamma);
  out.detail << "|mean - gamma|=" << mean_gap << " (3 SE=" << 3.0 * last.raw_mean_standard_error << "); ";
  out.require(mean_gap <= 3.0 * last.raw_mean_standard_error, "fixed-point mean");

  EnsembleOptions options;
  options.keep_raw = true;
  const auto locked = phase_locked_samples(law, 3.0, lambda2.imag(), 2, 2'000, derive_key(kSeed, 11), options);
  double sx = 0.0, sd = 0.0, sxx = 0.0, sxd = 0.0;
  out.detail << "W2:";
  for (const SimulationEnsemble& e : locked) {
    const double d = periodic_limit_distance(e, fixed.measure, model);
    out.detail << " x=" << e.x << " d=" << d;
    const double lx = std::log(e.x);
    const double ld = std::log(d);
    sx += lx;
    sd += ld;
    sxx += lx * lx;
    sxd += lx * ld;
  }
  const double k = static_cast<double>(locked.size());
  const double slope = (sxd - sx * sd / k) / (sxx - sx * sx / k);
  const double bound = *model.kappa - lambda2.real() + 0.1;
  out.detail << "; slope=" << slope << " bound=" << bound;
  out.require(slope <= bound, "transport decay exponent");
}

void beta_thresholds(Outcome& out) {
  const PhaseCrossing symmetric =
      locate_phase_crossing([](double a) { return SplitLaw::beta(a, a); }, 59.0, 60.5, 1e-2);
  const PhaseCrossing one_sided =
      locate_phase_crossing([](double a) { return SplitLaw::beta(a, 1.0); }, 26.0, 28.0, 1e-2);
  out.detail << "Beta(a,a): " << symmetric.parameter << " Beta(a,1): " << one_sided.parameter;
  out.require(std::abs(symmetric.parameter - 59.6) <= 0.5, "Beta(a,a) crossing");
  out.require(std::abs(one_sided.parameter - 26.9) <= 0.5, "Beta(a,1) crossing");
}

}  // namespace

int main() {
  criterion(1, "exact mean, binary uniform", 120.0, exact_binary_mean);
  criterion(2, "variance constant", 600.0, variance_constant);
  criterion(3, "m-ary threshold", 1.0, mary_threshold);
  criterion(4, "quad spectrum", 1.0, quad_spectrum);
  criterion(5, "alpha identities", 1.0, alpha_identities);
  criterion(6, "deterministic identities", 60.0, deterministic_identities);
  criterion(7, "external-node identity", 300.0, external_identity);
  criterion(8, "CLT, binary uniform", 600.0, clt_binary);
  criterion(9, "periodic phase, quad split d=9", 1800.0, periodic_phase);
  criterion(10, "beta thresholds", 60.0, beta_thresholds);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

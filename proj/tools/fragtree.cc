// fragtree command-line interface.
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure,
// 3 verification ran but at least one check failed.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fragtree/fixedpoint.hpp"
#include "fragtree/law_config.hpp"
#include "fragtree/pipeline.hpp"
#include "fragtree/renewal.hpp"
#include "fragtree/report.hpp"
#include "fragtree/simulate.hpp"
#include "fragtree/spectral.hpp"

namespace {

using nlohmann::json;
using namespace fragtree;

constexpr int kConfigError = 1;
constexpr int kNumericalFailure = 2;
constexpr int kChecksFailed = 3;

struct Options {
  std::string law;
  std::string law_file;
  std::vector<double> xs;
  std::uint64_t n = 10'000;
  std::uint64_t seed = 1;
  std::string out;
  std::string budget = "quick";
  bool bit_stable = false;
  int threads = 0;
  double tol = kDefaultRootTol;
  double delta = kDefaultDelta;
  double imag_bound = kDefaultImagBound;
  std::string raw_out;
  double h = kDefaultRenewalStep;
  double t_max = kDefaultRenewalHorizon;
  std::size_t samples = 100'000;
  int max_gen = 200;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

SplitLaw load_law(const Options& o) {
  if (!o.law.empty() && !o.law_file.empty()) throw ConfigError("give either --law or --law-file");
  if (!o.law_file.empty()) {
    std::ifstream file(o.law_file);
    if (!file) throw ConfigError("cannot open law file " + o.law_file);
    return law_from_json(json::parse(file));
  }
  if (o.law.empty()) throw ConfigError("--law is required");
  return parse_law(o.law);
}

// Writes `text` to --out, or stdout if no path was given.
void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream file(o.out);
  if (!file) throw ConfigError("cannot write " + o.out);
  file << text;
}

json base_report(const SplitLaw& law, const Options& o, const std::string& command) {
  json report = stamp(law, {o.seed});
  report["command"] = command;
  return report;
}

int cmd_roots(const Options& o) {
  const SplitLaw law = load_law(o);
  const Spectrum spectrum = find_roots(law, o.delta, o.imag_bound, o.tol);
  json report = base_report(law, o, "roots");
  report["spectrum"] = spectrum_to_json(spectrum);
  report["phase"] = phase_to_json(classify_phase(spectrum));
  emit(o, report.dump(2) + "\n");
  return 0;
}

int cmd_analyze(const Options& o) {
  const SplitLaw law = load_law(o);
  const Spectrum spectrum = find_roots(law, o.delta, o.imag_bound, o.tol);
  const PhaseReport phase = classify_phase(spectrum);
  MomentModel model = mean_expansion(law, spectrum);
  json report = base_report(law, o, "analyze");
  if (phase.phase == Phase::Normal && !law.is_deterministic()) {
    model.beta = beta_normal(law, spectrum);
    if (law.has_rational_phi() && law.all_parts_positive()) {
      const Estimate rational = beta_rational(law, model, SplitLaw::kDefaultMonteCarloSamples, o.seed);
      report["beta_rational"] = {{"value", rational.value}, {"error", rational.error}};
    }
  } else if (phase.phase == Phase::CriticalLine) {
    const CriticalBeta critical = beta_critical(law, spectrum, phase.tol);
    model.beta = Estimate{critical.value, 0.0};
  } else if (phase.phase == Phase::Periodic) {
    report["certificate"] = certificate_to_json(contraction_certificate(law, *model.lambda2));
    json terms = json::array();
    for (const auto& t : variance_periodic(law, spectrum).terms) {
      terms.push_back({{"lambda_i", complex_to_json(t.lambda_i)},
                       {"lambda_k", complex_to_json(t.lambda_k)},
                       {"coefficient", complex_to_json(t.coefficient)}});
    }
    report["variance_periodic"] = terms;
  }
  // A zero psi(lambda, conj lambda) means the lambda term carries no
  // randomness, which makes the matching limit degenerate.
  json psi_diagonal = json::array();
  for (std::size_t i = 1; i < spectrum.roots.size(); ++i) {
    const Complex lambda = spectrum.roots[i].lambda;
    const TransformValue v = psi(law, lambda, std::conj(lambda));
    psi_diagonal.push_back({{"lambda", complex_to_json(lambda)},
                            {"psi", v.value.real()},
                            {"error", v.error_bound},
                            {"positive", v.value.real() > v.error_bound + 1e-12}});
  }
  report["psi_diagonal"] = psi_diagonal;
  report["spectrum"] = spectrum_to_json(spectrum);
  report["phase"] = phase_to_json(phase);
  report["model"] = model_to_json(model);
  if (!o.xs.empty()) {
    json means = json::array();
    for (double x : o.xs) means.push_back({{"x", x}, {"mean", model.mean(x)}});
    report["mean"] = means;
  }
  emit(o, report.dump(2) + "\n");
  return 0;
}

int cmd_simulate(const Options& o) {
  const SplitLaw law = load_law(o);
  if (o.xs.empty()) throw ConfigError("simulate needs at least one --x");
  if (o.n < 1) throw ConfigError("--n must be >= 1");
  EnsembleOptions options;
  options.threads = o.threads;
  options.bit_stable = o.bit_stable;
  options.keep_raw = !o.raw_out.empty();
  std::vector<SimulationEnsemble> results;
  for (std::size_t i = 0; i < o.xs.size(); ++i) {
    results.push_back(ensemble(law, o.xs[i], o.n, derive_key(o.seed, i), options));
  }
  std::ostringstream csv;
  const json header = stamp(law, {o.seed});
  csv << "# " << header.dump() << "\n";
  write_ensemble_csv(csv, results);
  emit(o, csv.str());
  if (!o.raw_out.empty()) {
    for (std::size_t i = 0; i < results.size(); ++i) {
      const std::string path = results.size() == 1 ? o.raw_out : o.raw_out + "." + std::to_string(i);
      write_raw_values(path, results[i].raw);
    }
  }
  return 0;
}

int cmd_renewal(const Options& o) {
  const SplitLaw law = load_law(o);
  Rng rng(o.seed);
  const MeasureGrid grid = discretize_measure(law, o.h, o.t_max, o.samples, rng);
  const RenewalSolution mean = solve_renewal(grid, [](double) { return 1.0; });
  std::ostringstream csv;
  csv << "# " << stamp(law, {o.seed}).dump() << "\n";
  write_renewal_csv(csv, mean);
  emit(o, csv.str());
  return 0;
}

int cmd_fixedpoint(const Options& o) {
  const SplitLaw law = load_law(o);
  const Spectrum spectrum = find_roots(law, o.delta, o.imag_bound, o.tol);
  const MomentModel model = mean_expansion(law, spectrum);
  if (model.phase != Phase::Periodic) throw PreconditionError("fixedpoint needs a Periodic-phase law");
  FixedPointOptions options;
  options.n_samples = o.samples;
  options.seed = o.seed;
  options.threads = o.threads;
  options.max_gen = o.max_gen;
  const FixedPointResult result = iterate_to_fixed_point(law, *model.lambda2, *model.gamma, options);
  std::ostringstream csv;
  json header = stamp(law, {o.seed});
  header["generations"] = result.trace.size();
  header["certificate"] = certificate_to_json(result.certificate);
  csv << "# " << header.dump() << "\n";
  write_fixed_point_csv(csv, result.measure);
  emit(o, csv.str());
  return 0;
}

int cmd_verify(const Options& o) {
  const SplitLaw law = load_law(o);
  VerifyConfig config;
  config.budget = budget_named(o.budget);
  config.seed = o.seed;
  config.threads = o.threads;
  config.bit_stable = o.bit_stable;
  const VerifyOutcome outcome = run_verification(law, config);
  json report = base_report(law, o, "verify");
  report["budget"] = o.budget;
  report["verification"] = verification_to_json(outcome.report);
  report["details"] = outcome.details;
  emit(o, report.dump(2) + "\n");
  for (const auto& r : outcome.report.records) {
    std::cerr << (r.pass ? "PASS " : "FAIL ") << r.name << "  statistic=" << r.statistic
              << " threshold=" << r.threshold << "\n";
  }
  return outcome.report.all_passed() ? 0 : kChecksFailed;
}

void add_law_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--law", o.law, "law spec, e.g. binary, mary:27, beta:2,3, det:1/3,2/3")
      ->envname("FRAGTREE_LAW");
  cmd->add_option("--law-file", o.law_file, "law as a JSON document");
  cmd->add_option("--out", o.out, "output path (default stdout)");
  cmd->add_option("--seed", o.seed, "master seed")->envname("FRAGTREE_SEED");
  cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)")->envname("FRAGTREE_THREADS");
}

void add_spectral_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--tol", o.tol, "root residual tolerance")->envname("FRAGTREE_TOL");
  cmd->add_option("--delta", o.delta, "left edge of the root strip");
  cmd->add_option("--imag-bound", o.imag_bound, "half height of the root strip");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random fragmentation trees: spectra, moments, simulation and verification"};
  app.set_version_flag("--version", fragtree::version());
  app.require_subcommand(1);
  Options o;

  auto* roots = app.add_subcommand("roots", "roots of phi(lambda) = 1 and the phase");
  add_law_options(roots, o);
  add_spectral_options(roots, o);

  auto* analyze = app.add_subcommand("analyze", "moment constants and phase report");
  add_law_options(analyze, o);
  add_spectral_options(analyze, o);
  analyze->add_option("--x", o.xs, "evaluate the mean model at these x");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo ensembles of N(x), CSV output");
  add_law_options(simulate, o);
  simulate->add_option("--x", o.xs, "fragment sizes")->required();
  simulate->add_option("--n", o.n, "replicates per x")->envname("FRAGTREE_N");
  simulate->add_flag("--bit-stable", o.bit_stable, "fixed chunking independent of --threads");
  simulate->add_option("--raw-out", o.raw_out, "write raw N values (binary FTRAW001 format)");

  auto* renewal = app.add_subcommand("renewal", "numerical mean E N(e^t) from the renewal equation");
  add_law_options(renewal, o);
  renewal->add_option("--step", o.h, "grid step");
  renewal->add_option("--t-max", o.t_max, "grid horizon");

  auto* fixedpoint = app.add_subcommand("fixedpoint", "iterate the limit map in the Periodic phase");
  add_law_options(fixedpoint, o);
  add_spectral_options(fixedpoint, o);
  fixedpoint->add_option("--samples", o.samples, "population size");
  fixedpoint->add_option("--max-gen", o.max_gen, "maximum generations");

  auto* verify = app.add_subcommand("verify", "end-to-end checks of theory against simulation");
  add_law_options(verify, o);
  verify->add_option("--budget", o.budget, "quick | standard | paper")->envname("FRAGTREE_BUDGET");
  verify->add_flag("--bit-stable", o.bit_stable, "fixed chunking independent of --threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*roots) return cmd_roots(o);
    if (*analyze) return cmd_analyze(o);
    if (*simulate) return cmd_simulate(o);
    if (*renewal) return cmd_renewal(o);
    if (*fixedpoint) return cmd_fixedpoint(o);
    if (*verify) return cmd_verify(o);
  } catch (const LawConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const PreconditionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  }
  return kConfigError;
}

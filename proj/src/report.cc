#include "fragtree/report.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "fragtree/law_config.hpp"

#ifndef FRAGTREE_VERSION
#define FRAGTREE_VERSION "0.0.0"
#endif

namespace fragtree {
namespace {

constexpr char kRawMagic[8] = {'F', 'T', 'R', 'A', 'W', '0', '0', '1'};

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xFFu) << (8 * (7 - i));
    return r;
  }
  return v;
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string method_name(RootMethod m) {
  return m == RootMethod::CompanionMatrix ? "companion_matrix" : "argument_principle";
}

nlohmann::json root_to_json(const Root& r) {
  return {{"lambda", complex_to_json(r.lambda)},
          {"multiplicity", r.multiplicity},
          {"residual", r.residual},
          {"phi_prime", complex_to_json(r.phi_prime)},
          {"error_estimate", r.error_estimate},
          {"simple_certified", r.simple_certified}};
}

nlohmann::json terms_to_json(const std::vector<ExpansionTerm>& terms) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& t : terms) {
    out.push_back({{"lambda", complex_to_json(t.lambda)}, {"a", complex_to_json(t.coefficient)}});
  }
  return out;
}

}  // namespace

std::string version() { return FRAGTREE_VERSION; }

nlohmann::json complex_to_json(Complex z) { return {{"re", z.real()}, {"im", z.imag()}}; }

nlohmann::json spectrum_to_json(const Spectrum& spectrum) {
  nlohmann::json roots = nlohmann::json::array();
  for (const auto& r : spectrum.roots) roots.push_back(root_to_json(r));
  nlohmann::json out = {{"roots", roots},
                        {"strip", {{"delta", spectrum.strip.delta}, {"imag_bound", spectrum.strip.imag_bound}}},
                        {"method", method_name(spectrum.method)},
                        {"tol", spectrum.tol},
                        {"closed_form", spectrum.closed_form},
                        {"warnings", spectrum.warnings}};
  if (!spectrum.full_plane_roots.empty()) {
    nlohmann::json all = nlohmann::json::array();
    for (const auto& r : spectrum.full_plane_roots) all.push_back(root_to_json(r));
    out["full_plane_roots"] = all;
  }
  if (spectrum.contour_count) out["contour_count"] = *spectrum.contour_count;
  return out;
}

nlohmann::json phase_to_json(const PhaseReport& report) {
  nlohmann::json line = nlohmann::json::array();
  for (const auto& c : report.line_roots) {
    line.push_back({{"lambda", complex_to_json(c.lambda)}, {"simple", c.simple}});
  }
  nlohmann::json out = {{"phase", to_string(report.phase)},
                        {"sigma2", report.sigma2},
                        {"tau2", report.tau2},
                        {"tol", report.tol},
                        {"line_roots", line},
                        {"near_boundary", report.near_boundary}};
  out["lambda2"] = report.lambda2 ? complex_to_json(*report.lambda2) : nlohmann::json(nullptr);
  if (!report.note.empty()) out["note"] = report.note;
  return out;
}

nlohmann::json model_to_json(const MomentModel& model) {
  nlohmann::json out = {{"alpha", model.alpha},
                        {"a_coeffs", terms_to_json(model.a_coeffs)},
                        {"phase", to_string(model.phase)}};
  if (!model.exact_terms.empty()) out["exact_terms"] = terms_to_json(model.exact_terms);
  out["a0"] = optional_json(model.a0);
  out["beta"] = model.beta ? nlohmann::json{{"value", model.beta->value}, {"error", model.beta->error}}
                           : nlohmann::json(nullptr);
  out["gamma"] = model.gamma ? complex_to_json(*model.gamma) : nlohmann::json(nullptr);
  out["kappa"] = optional_json(model.kappa);
  return out;
}

nlohmann::json ensemble_to_json(const SimulationEnsemble& e) {
  const auto& acc = e.internal;
  return {{"x", e.x},
          {"n", e.n},
          {"master_seed", e.master_seed},
          {"mean", acc.mean()},
          {"variance", optional_json(acc.variance())},
          {"m3", acc.central_moment3()},
          {"m4", acc.central_moment4()},
          {"stderr", optional_json(acc.standard_error())},
          {"skewness", optional_json(acc.skewness())},
          {"excess_kurtosis", optional_json(acc.excess_kurtosis())},
          {"max_depth", e.max_depth},
          {"external_identity_failures", e.external_identity_failures},
          {"total_nodes", e.total_nodes}};
}

nlohmann::json certificate_to_json(const ContractionCertificate& c) {
  return {{"lambda2", complex_to_json(c.lambda2)},
          {"xi", c.xi},
          {"lipschitz_bound", c.lipschitz_bound},
          {"valid", c.valid}};
}

nlohmann::json record_to_json(const TestRecord& r) {
  nlohmann::json out = {{"name", r.name},           {"statistic", r.statistic},
                        {"threshold", r.threshold}, {"pass", r.pass},
                        {"sample_size", r.sample_size}, {"seed", r.seed}};
  if (!r.note.empty()) out["note"] = r.note;
  return out;
}

nlohmann::json verification_to_json(const VerificationReport& report) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : report.records) records.push_back(record_to_json(r));
  return {{"law_hash", report.law_hash},
          {"law", report.law_spec},
          {"phase_claimed", report.phase_claimed},
          {"phase_detected", report.phase_detected},
          {"records", records},
          {"all_passed", report.all_passed()}};
}

nlohmann::json stamp(const SplitLaw& law, const std::vector<std::uint64_t>& seeds) {
  return {{"tool", "fragtree"},
          {"version", version()},
          {"law", law_to_json(law)},
          {"config_hash", law_hash(law)},
          {"seeds", seeds}};
}

void write_ensemble_csv(std::ostream& out, const std::vector<SimulationEnsemble>& ensembles) {
  out << "x,n,mean,var,m3,m4,stderr\n" << std::setprecision(17);
  for (const auto& e : ensembles) {
    const auto& acc = e.internal;
    out << e.x << ',' << e.n << ',' << acc.mean() << ',';
    if (auto v = acc.variance()) out << *v;
    out << ',' << acc.central_moment3() << ',' << acc.central_moment4() << ',';
    if (auto se = acc.standard_error()) out << *se;
    out << '\n';
  }
}

void write_renewal_csv(std::ostream& out, const RenewalSolution& solution) {
  out << "t,x,value,error_estimate\n" << std::setprecision(17);
  for (std::size_t k = 0; k < solution.values.size(); ++k) {
    const double mc = k < solution.mc_error.size() ? solution.mc_error[k] : 0.0;
    const double error = solution.error_estimate[k] + mc;
    out << solution.t[k] << ',' << std::exp(solution.t[k]) << ',' << solution.values[k] << ',' << error
        << '\n';
  }
}

void write_fixed_point_csv(std::ostream& out, const EmpiricalComplexMeasure& measure) {
  out << "re,im\n" << std::setprecision(17);
  for (Complex z : measure.samples) out << z.real() << ',' << z.imag() << '\n';
}

void write_raw_values(const std::string& path, const std::vector<double>& values) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("write_raw_values: cannot open " + path);
  file.write(kRawMagic, sizeof kRawMagic);
  const std::uint64_t count = to_little_endian(values.size());
  file.write(reinterpret_cast<const char*>(&count), sizeof count);
  for (double v : values) {
    const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
    file.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
  if (!file) throw std::runtime_error("write_raw_values: write failed for " + path);
}

std::vector<double> read_raw_values(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("read_raw_values: cannot open " + path);
  char magic[8];
  file.read(magic, sizeof magic);
  if (!file || std::memcmp(magic, kRawMagic, sizeof magic) != 0) {
    throw std::runtime_error("read_raw_values: bad magic in " + path);
  }
  std::uint64_t count = 0;
  file.read(reinterpret_cast<char*>(&count), sizeof count);
  count = to_little_endian(count);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(count));
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    file.read(reinterpret_cast<char*>(&bits), sizeof bits);
    if (!file) throw std::runtime_error("read_raw_values: truncated file " + path);
    values.push_back(std::bit_cast<double>(to_little_endian(bits)));
  }
  return values;
}

}  // namespace fragtree

#include "fragtree/law_config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace fragtree {
namespace {

using nlohmann::json;

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_real(std::string_view token, std::string_view context) {
  token = trim(token);
  double value = 0.0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end || token.empty()) {
    throw LawConfigError("malformed number '" + std::string(token) + "' in " + std::string(context));
  }
  return value;
}

int parse_int(std::string_view token, std::string_view context) {
  token = trim(token);
  int value = 0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end || token.empty()) {
    throw LawConfigError("malformed integer '" + std::string(token) + "' in " +
                         std::string(context));
  }
  return value;
}

double parse_weight(std::string_view token, std::string_view context) {
  const auto slash = token.find('/');
  if (slash == std::string_view::npos) return parse_real(token, context);
  const double num = parse_real(token.substr(0, slash), context);
  const double den = parse_real(token.substr(slash + 1), context);
  if (den == 0.0) throw LawConfigError("zero denominator in " + std::string(context));
  return num / den;
}

std::string family_key(Family family) {
  switch (family) {
    case Family::BinaryUniform: return "binary";
    case Family::MaryUniform: return "mary";
    case Family::QuadSplit: return "quad";
    case Family::SimplexSplit: return "simplex";
    case Family::Beta: return "beta";
    case Family::Deterministic: return "det";
    case Family::LatticeDeterministic: return "lattice";
    case Family::EmpiricalSamples: return "empirical";
  }
  return {};
}

std::string lattice_key(LatticeKind kind) {
  switch (kind) {
    case LatticeKind::Lattice: return "lattice";
    case LatticeKind::NonLattice: return "non_lattice";
    case LatticeKind::Unknown: return "unknown";
  }
  return {};
}

}  // namespace

SplitLaw parse_law(std::string_view text) {
  text = trim(text);
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string_view rest = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  const bool has_args = colon != std::string_view::npos;

  if (head == "binary") {
    if (has_args) throw LawConfigError("binary takes no parameters");
    return SplitLaw::binary_uniform();
  }
  if (!has_args || rest.empty()) {
    throw LawConfigError("law '" + std::string(text) + "' is missing parameters or unknown");
  }
  if (head == "mary") return SplitLaw::mary_uniform(parse_int(rest, text));
  if (head == "quad") return SplitLaw::quad_split(parse_int(rest, text));
  if (head == "simplex") return SplitLaw::simplex_split(parse_int(rest, text));
  if (head == "beta") {
    const auto parts = split(rest, ',');
    if (parts.size() != 2) throw LawConfigError("beta expects two parameters: beta:<a>,<a'>");
    return SplitLaw::beta(parse_real(parts[0], text), parse_real(parts[1], text));
  }
  if (head == "det") {
    std::vector<double> weights;
    for (auto token : split(rest, ',')) weights.push_back(parse_weight(token, text));
    return SplitLaw::deterministic(std::move(weights));
  }
  if (head == "lattice") {
    const auto parts = split(rest, ':');
    if (parts.size() != 2) throw LawConfigError("lattice expects lattice:<R>:<e1>,...,<eb>");
    std::vector<int> exponents;
    for (auto token : split(parts[1], ',')) exponents.push_back(parse_int(token, text));
    return SplitLaw::lattice(parse_real(parts[0], text), std::move(exponents));
  }
  if (head == "empirical") return load_empirical_law(std::string(rest));
  throw LawConfigError("unknown law family '" + std::string(head) + "'");
}

json law_to_json(const SplitLaw& law) {
  json out;
  out["family"] = family_key(law.family());
  switch (law.family()) {
    case Family::MaryUniform:
      out["m"] = law.order();
      break;
    case Family::QuadSplit:
    case Family::SimplexSplit:
      out["d"] = law.order();
      break;
    case Family::Beta:
      out["a"] = law.beta_a();
      out["a_prime"] = law.beta_a_prime();
      break;
    case Family::Deterministic:
      out["weights"] = law.weights();
      break;
    case Family::LatticeDeterministic:
      out["base"] = law.lattice_info().base;
      out["exponents"] = law.lattice_info().exponents;
      break;
    case Family::EmpiricalSamples:
      out["path"] = law.source_path();
      break;
    case Family::BinaryUniform:
      break;
  }
  out["b"] = law.parts();
  out["lattice"] = lattice_key(law.lattice_kind());
  out["condition_a"] = law.condition_a();
  out["condition_a_prime"] = law.condition_a_prime();
  return out;
}

SplitLaw law_from_json(const json& config) {
  try {
    const std::string family = config.at("family").get<std::string>();
    SplitLaw law = [&]() {
      if (family == "binary") return SplitLaw::binary_uniform();
      if (family == "mary") return SplitLaw::mary_uniform(config.at("m").get<int>());
      if (family == "quad") return SplitLaw::quad_split(config.at("d").get<int>());
      if (family == "simplex") return SplitLaw::simplex_split(config.at("d").get<int>());
      if (family == "beta") {
        return SplitLaw::beta(config.at("a").get<double>(), config.at("a_prime").get<double>());
      }
      if (family == "det") {
        return SplitLaw::deterministic(config.at("weights").get<std::vector<double>>());
      }
      if (family == "lattice") {
        return SplitLaw::lattice(config.at("base").get<double>(),
                                 config.at("exponents").get<std::vector<int>>());
      }
      if (family == "empirical") return load_empirical_law(config.at("path").get<std::string>());
      throw LawConfigError("unknown law family '" + family + "'");
    }();
    if (config.contains("b") && config.at("b").get<int>() != law.parts()) {
      throw LawConfigError("declared b does not match the family");
    }
    if (config.contains("lattice") &&
        config.at("lattice").get<std::string>() != lattice_key(law.lattice_kind())) {
      throw LawConfigError("declared lattice flag contradicts the family");
    }
    if (config.contains("condition_a") || config.contains("condition_a_prime")) {
      law = law.with_declared_conditions(config.value("condition_a", law.condition_a()),
                                         config.value("condition_a_prime", law.condition_a_prime()));
    }
    return law;
  } catch (const json::exception& e) {
    throw LawConfigError(std::string("law config: ") + e.what());
  }
}

SplitLaw load_empirical_law(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LawConfigError("cannot open empirical sample file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    const auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    std::string cleaned(view);
    for (char& c : cleaned) {
      if (c == ',') c = ' ';
    }
    std::istringstream fields(cleaned);
    std::vector<double> row;
    std::string token;
    while (fields >> token) row.push_back(parse_real(token, path));
    rows.push_back(std::move(row));
  }
  return SplitLaw::empirical(std::move(rows), path);
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string law_hash(const SplitLaw& law) { return hex64(fnv1a64(law_to_json(law).dump())); }

}  // namespace fragtree

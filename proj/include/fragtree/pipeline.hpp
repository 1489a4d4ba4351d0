#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "fragtree/split_law.hpp"
#include "fragtree/stats.hpp"

namespace fragtree {

/// Sample sizes and x grids for the end-to-end verification.
struct Budget {
  std::string name;
  std::uint64_t n = 0;
  std::vector<double> xs;
  double clt_x = 0.0;
  std::uint64_t clt_n = 0;
  std::size_t calibration_trials = 0;
  /// Geometric grid for the variance model selection; empty to skip it.
  std::vector<double> variance_xs;
  std::uint64_t variance_n = 0;
  std::size_t fixed_point_samples = 0;
  double phase_locked_x0 = 3.0;
  int phase_locked_points = 3;
  std::uint64_t phase_locked_n = 0;
};

/// quick | standard | paper. Throws std::invalid_argument otherwise.
Budget budget_named(const std::string& name);

struct VerifyConfig {
  Budget budget;
  std::uint64_t seed = 1;
  int threads = 0;
  bool bit_stable = true;
};

struct VerifyOutcome {
  VerificationReport report;
  /// Spectrum, constants and per-check data for the JSON output.
  nlohmann::json details;
};

/// roots -> constants -> simulation -> statistics, plus the fixed-point
/// checks in the Periodic phase and exact counts for deterministic laws.
VerifyOutcome run_verification(const SplitLaw& law, const VerifyConfig& config);

}  // namespace fragtree

#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fragtree/moments.hpp"
#include "fragtree/split_law.hpp"

namespace fragtree {

class WorkCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A fragment of size at least 1 - kSizeSlack splits again. The slack absorbs
/// rounding in products of weights so that exact lattice points (x = R^n)
/// behave as in exact arithmetic.
inline constexpr double kSizeSlack = 1e-12;

struct FragmentationRun {
  double x = 0.0;
  std::uint64_t n_internal = 0;  // N(x)
  std::uint64_t n_external = 0;  // leaves hanging off internal nodes
  int max_depth = 0;
  std::uint64_t seed = 0;
};

struct SimulationLimits {
  std::uint64_t max_work = 1'000'000'000;
  /// Memo entries for run_deterministic.
  std::size_t max_memo = 50'000'000;
};

/// One realisation of N(x). The split vector at a node is drawn from a
/// generator keyed by the node's path from the root (child j of key k has key
/// derive_key(k, j)), so runs with the same seed and different x share split
/// vectors node by node and N(x) is monotone in x.
FragmentationRun run_once(const SplitLaw& law, double x, std::uint64_t seed,
                          const SimulationLimits& limits = {});

/// Exact count for deterministic split laws by memoised recursion: on the
/// level index for lattice laws, on exponent tuples otherwise.
FragmentationRun run_deterministic(const SplitLaw& law, double x,
                                   const SimulationLimits& limits = {});

struct EnsembleOptions {
  bool keep_raw = false;
  std::size_t raw_cap = 1'000'000;
  int threads = 0;
  /// Fixed chunk size independent of the worker count.
  bool bit_stable = true;
  SimulationLimits limits;
};

struct SimulationEnsemble {
  double x = 0.0;
  std::uint64_t n = 0;
  std::uint64_t master_seed = 0;
  MomentAccumulator internal;
  /// First raw_cap values of N(x) in replicate order.
  std::vector<double> raw;
  int max_depth = 0;
  /// Number of runs that violated n_external = (b - 1) n_internal + 1.
  std::uint64_t external_identity_failures = 0;
  std::uint64_t total_nodes = 0;
};

/// Seed of replicate i: derive_key(master_seed, i).
std::uint64_t replicate_seed(std::uint64_t master_seed, std::uint64_t index);

SimulationEnsemble ensemble(const SplitLaw& law, double x, std::uint64_t n,
                            std::uint64_t master_seed, const EnsembleOptions& options = {});

/// Ensembles at x_k = x0 e^{2 pi k / tau}, k = 0..k_max, which share the phase
/// of e^{i tau ln x}. Point k uses master seed derive_key(master_seed, k).
std::vector<SimulationEnsemble> phase_locked_samples(const SplitLaw& law, double x0, double tau,
                                                     int k_max, std::uint64_t n,
                                                     std::uint64_t master_seed,
                                                     const EnsembleOptions& options = {});

/// x_k of phase_locked_samples.
double phase_locked_x(double x0, double tau, int k);

}  // namespace fragtree

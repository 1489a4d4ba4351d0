#include "fragtree/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "fragtree/parallel.hpp"
#include "fragtree/rng.hpp"

namespace fragtree {
namespace {

constexpr double kThreshold = 1.0 - kSizeSlack;

struct PendingNode {
  double size;
  std::uint64_t key;
  int depth;
};

struct DeterministicCounts {
  std::uint64_t internal = 0;
  std::uint64_t external = 0;
  int depth = 0;  // depth of the deepest internal node below, root = 0
};

FragmentationRun lattice_counts(const SplitLaw& law, double x, const SimulationLimits& limits) {
  const LatticeInfo& info = law.lattice_info();
  const double levels = std::log(x) / std::log(info.base);
  const auto top = static_cast<long long>(std::floor(levels + 1e-9));
  if (static_cast<std::size_t>(top + 1) > limits.max_memo) {
    throw WorkCapExceeded("run_deterministic: memo cap exceeded");
  }
  std::vector<DeterministicCounts> memo(static_cast<std::size_t>(top + 1));
  for (long long k = top; k >= 0; --k) {
    DeterministicCounts counts;
    counts.internal = 1;
    for (int e : info.exponents) {
      const long long child = k + e;
      if (e < 0 || child > top) {
        counts.external += 1;
      } else {
        const auto& c = memo[static_cast<std::size_t>(child)];
        counts.internal += c.internal;
        counts.external += c.external;
        counts.depth = std::max(counts.depth, c.depth + 1);
      }
    }
    memo[static_cast<std::size_t>(k)] = counts;
  }
  FragmentationRun run;
  run.x = x;
  run.n_internal = memo[0].internal;
  run.n_external = memo[0].external;
  run.max_depth = memo[0].depth;
  return run;
}

class TupleCounter {
 public:
  TupleCounter(const SplitLaw& law, double x, const SimulationLimits& limits)
      : log_x_(std::log(x)), limits_(limits) {
    for (double w : law.weights()) log_w_.push_back(w > 0.0 ? std::log(w) : -INFINITY);
  }

  DeterministicCounts count(std::vector<int>& tuple, double log_size) {
    if (auto it = memo_.find(tuple); it != memo_.end()) return it->second;
    if (memo_.size() >= limits_.max_memo) throw WorkCapExceeded("run_deterministic: memo cap exceeded");
    DeterministicCounts counts;
    counts.internal = 1;
    for (std::size_t j = 0; j < log_w_.size(); ++j) {
      const double child = log_size + log_w_[j];
      if (!(std::exp(child) >= kThreshold)) {
        counts.external += 1;
        continue;
      }
      ++tuple[j];
      const DeterministicCounts c = count(tuple, log_x_ + dot(tuple));
      --tuple[j];
      counts.internal += c.internal;
      counts.external += c.external;
      counts.depth = std::max(counts.depth, c.depth + 1);
    }
    memo_.emplace(tuple, counts);
    return counts;
  }

 private:
  // Recomputing the log size from the tuple keeps rounding independent of the
  // path that reached it.
  double dot(const std::vector<int>& tuple) const {
    double s = 0.0;
    for (std::size_t j = 0; j < tuple.size(); ++j) {
      if (tuple[j] != 0) s += tuple[j] * log_w_[j];
    }
    return s;
  }

  double log_x_;
  std::vector<double> log_w_;
  const SimulationLimits& limits_;
  std::map<std::vector<int>, DeterministicCounts> memo_;
};

}  // namespace

FragmentationRun run_once(const SplitLaw& law, double x, std::uint64_t seed,
                          const SimulationLimits& limits) {
  if (!(x >= 0.0)) throw std::invalid_argument("run_once: x must be >= 0");
  FragmentationRun run;
  run.x = x;
  run.seed = seed;
  if (x < kThreshold) return run;  // no tree: both counts stay 0
  const std::size_t b = static_cast<std::size_t>(law.parts());
  std::vector<double> v(b);
  std::vector<PendingNode> stack;
  stack.push_back({x, seed, 0});
  while (!stack.empty()) {
    const PendingNode node = stack.back();
    stack.pop_back();
    if (++run.n_internal > limits.max_work) {
      throw WorkCapExceeded("run_once: work cap exceeded");
    }
    run.max_depth = std::max(run.max_depth, node.depth);
    Rng rng(node.key);
    law.sample(rng, v);
    for (std::size_t j = 0; j < b; ++j) {
      const double size = node.size * v[j];
      if (size >= kThreshold) {
        stack.push_back({size, derive_key(node.key, j), node.depth + 1});
      } else {
        ++run.n_external;
      }
    }
  }
  return run;
}

FragmentationRun run_deterministic(const SplitLaw& law, double x, const SimulationLimits& limits) {
  if (!law.is_deterministic()) throw std::invalid_argument("run_deterministic: law is random");
  if (!(x >= 0.0)) throw std::invalid_argument("run_deterministic: x must be >= 0");
  if (x < kThreshold) {
    FragmentationRun run;
    run.x = x;
    return run;
  }
  if (law.lattice_kind() == LatticeKind::Lattice && !law.lattice_info().exponents.empty()) {
    return lattice_counts(law, x, limits);
  }
  TupleCounter counter(law, x, limits);
  std::vector<int> tuple(law.weights().size(), 0);
  const DeterministicCounts counts = counter.count(tuple, std::log(x));
  FragmentationRun run;
  run.x = x;
  run.n_internal = counts.internal;
  run.n_external = counts.external;
  run.max_depth = counts.depth;
  return run;
}

std::uint64_t replicate_seed(std::uint64_t master_seed, std::uint64_t index) {
  return derive_key(master_seed, index);
}

SimulationEnsemble ensemble(const SplitLaw& law, double x, std::uint64_t n,
                            std::uint64_t master_seed, const EnsembleOptions& options) {
  if (n < 1) throw std::invalid_argument("ensemble: n must be >= 1");
  const unsigned threads = resolve_threads(options.threads);
  constexpr std::uint64_t kStableChunk = 1024;
  const std::uint64_t chunk_size =
      options.bit_stable ? kStableChunk : std::max<std::uint64_t>(kStableChunk, n / (4 * threads));
  const std::uint64_t chunks = (n + chunk_size - 1) / chunk_size;
  const std::uint64_t b_minus_one = static_cast<std::uint64_t>(law.parts() - 1);

  struct ChunkResult {
    MomentAccumulator acc;
    std::vector<double> raw;
    int max_depth = 0;
    std::uint64_t failures = 0;
    std::uint64_t nodes = 0;
  };
  std::vector<ChunkResult> results(chunks);
  parallel_chunks(chunks, threads, [&](std::size_t c) {
    ChunkResult& r = results[c];
    const std::uint64_t begin = c * chunk_size;
    const std::uint64_t end = std::min(n, begin + chunk_size);
    const bool keep = options.keep_raw && begin < options.raw_cap;
    for (std::uint64_t i = begin; i < end; ++i) {
      const FragmentationRun run = run_once(law, x, replicate_seed(master_seed, i), options.limits);
      const double value = static_cast<double>(run.n_internal);
      r.acc.add(value);
      if (keep && i < options.raw_cap) r.raw.push_back(value);
      r.max_depth = std::max(r.max_depth, run.max_depth);
      r.nodes += run.n_internal;
      if (run.n_internal > 0 && run.n_external != b_minus_one * run.n_internal + 1) ++r.failures;
    }
  });

  SimulationEnsemble out;
  out.x = x;
  out.n = n;
  out.master_seed = master_seed;
  for (const ChunkResult& r : results) {
    out.internal.merge(r.acc);
    out.raw.insert(out.raw.end(), r.raw.begin(), r.raw.end());
    out.max_depth = std::max(out.max_depth, r.max_depth);
    out.external_identity_failures += r.failures;
    out.total_nodes += r.nodes;
  }
  return out;
}

double phase_locked_x(double x0, double tau, int k) {
  return x0 * std::exp(2.0 * std::numbers::pi * k / tau);
}

std::vector<SimulationEnsemble> phase_locked_samples(const SplitLaw& law, double x0, double tau,
                                                     int k_max, std::uint64_t n,
                                                     std::uint64_t master_seed,
                                                     const EnsembleOptions& options) {
  if (!(tau > 0.0)) throw std::invalid_argument("phase_locked_samples: tau must be positive");
  std::vector<SimulationEnsemble> out;
  for (int k = 0; k <= k_max; ++k) {
    out.push_back(ensemble(law, phase_locked_x(x0, tau, k), n,
                           derive_key(master_seed, static_cast<std::uint64_t>(k)), options));
  }
  return out;
}

}  // namespace fragtree

#include "fragtree/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <span>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "fragtree/parallel.hpp"

namespace fragtree {
namespace {

// mu([0, t]) for families with a closed-form distribution function.
double closed_form_cdf(const SplitLaw& law, double t) {
  if (t <= 0.0) return 0.0;
  switch (law.family()) {
    case Family::BinaryUniform:
      return -2.0 * std::expm1(-t);
    case Family::MaryUniform:
    case Family::SimplexSplit: {
      const int m = law.parts();
      return m * std::pow(-std::expm1(-t), m - 1);
    }
    case Family::QuadSplit:
      return std::ldexp(boost::math::gamma_p(law.order(), t), law.order());
    case Family::Beta: {
      const double y = std::exp(-t);
      return boost::math::ibetac(law.beta_a(), law.beta_a_prime(), y) +
             boost::math::ibetac(law.beta_a_prime(), law.beta_a(), y);
    }
    default:
      return 0.0;
  }
}

bool has_atoms(const SplitLaw& law) {
  return law.family() == Family::Deterministic || law.family() == Family::LatticeDeterministic ||
         law.family() == Family::EmpiricalSamples;
}

std::size_t bin_index(double x, double h) {
  return static_cast<std::size_t>(std::max(0.0, std::ceil(x / h - 0.5)));
}

void add_atoms(const SplitLaw& law, MeasureGrid& grid) {
  auto add = [&grid](double v, double weight) {
    if (v <= 0.0) return;
    grid.total_mass += weight;
    const std::size_t k = bin_index(-std::log(v), grid.h);
    if (k < grid.size()) grid.mu_mass[k] += weight;
  };
  if (law.family() == Family::EmpiricalSamples) {
    const std::size_t rows = law.empirical_rows();
    for (std::size_t i = 0; i < rows; ++i) {
      for (double v : law.empirical_row(i)) add(v, 1.0 / static_cast<double>(rows));
    }
  } else {
    for (double w : law.weights()) add(w, 1.0);
  }
}

std::vector<double> recurrence(const std::vector<double>& mass, const std::vector<double>& f,
                               double cap) {
  const std::size_t n = f.size();
  std::vector<double> out(n, 0.0);
  const double diagonal = 1.0 - mass[0];
  if (!(diagonal > 0.0)) throw RenewalInstability("solve_renewal: atom at 0 has mass >= 1");
  const std::size_t width = mass.size();
  for (std::size_t k = 0; k < n; ++k) {
    double acc = f[k];
    const std::size_t jmax = std::min(k, width - 1);
    for (std::size_t j = 1; j <= jmax; ++j) acc += mass[j] * out[k - j];
    out[k] = acc / diagonal;
    if (!std::isfinite(out[k]) || std::abs(out[k]) > cap) {
      throw RenewalInstability("solve_renewal: solution exceeds e^{2 t_max}");
    }
  }
  return out;
}

}  // namespace

MeasureGrid MeasureGrid::coarsened() const {
  MeasureGrid coarse = *this;
  coarse.h = 2.0 * h;
  const std::size_t n = (size() + 1) / 2;
  coarse.mu_mass.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double mass = mu_mass[2 * k];
    if (k > 0) mass += 0.5 * mu_mass[2 * k - 1];
    if (2 * k + 1 < size()) mass += 0.5 * mu_mass[2 * k + 1];
    coarse.mu_mass[k] = mass;
  }
  return coarse;
}

MeasureGrid discretize_measure(const SplitLaw& law, double h, double t_max, std::size_t n_samples,
                               Rng& rng, bool force_monte_carlo) {
  if (!(h > 0.0) || !(t_max > 0.0)) throw std::invalid_argument("discretize_measure: need h, t_max > 0");
  MeasureGrid grid;
  grid.h = h;
  grid.t_max = t_max;
  grid.mu_mass.assign(static_cast<std::size_t>(std::floor(t_max / h + 1e-9)) + 1, 0.0);
  const std::size_t bins = grid.size();
  double tilt_se = 0.0;

  if (force_monte_carlo) {
    grid.monte_carlo = true;
    grid.n_samples = n_samples;
    std::vector<double> v(static_cast<std::size_t>(law.parts()));
    double tilt_sum = 0.0;
    double tilt_sq = 0.0;
    const double weight = 1.0 / static_cast<double>(n_samples);
    for (std::size_t s = 0; s < n_samples; ++s) {
      law.sample(rng, v);
      double tilt = 0.0;
      for (double vj : v) {
        if (vj <= 0.0) continue;
        grid.total_mass += weight;
        const std::size_t k = bin_index(-std::log(vj), h);
        if (k < bins) {
          grid.mu_mass[k] += weight;
          tilt += std::exp(-static_cast<double>(k) * h);
        }
      }
      tilt_sum += tilt;
      tilt_sq += tilt * tilt;
    }
    const double n = static_cast<double>(n_samples);
    const double mean = tilt_sum / n;
    tilt_se = std::sqrt(std::max(0.0, tilt_sq / n - mean * mean) / std::max(1.0, n - 1.0));
  } else if (has_atoms(law)) {
    add_atoms(law, grid);
  } else {
    double previous = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      const double edge = (static_cast<double>(k) + 0.5) * h;
      const double current = closed_form_cdf(law, edge);
      grid.mu_mass[k] = std::max(0.0, current - previous);
      previous = current;
    }
    grid.total_mass = law.positive_part_count();
  }

  double tilt = 0.0;
  double in_grid = 0.0;
  for (std::size_t k = 0; k < bins; ++k) {
    tilt += grid.mu_mass[k] * std::exp(-static_cast<double>(k) * h);
    in_grid += grid.mu_mass[k];
  }
  grid.tilt_check = tilt;
  const double tail = std::max(0.0, grid.total_mass - in_grid) * std::exp(-t_max);
  grid.tilt_error = tail + std::expm1(0.5 * h) * tilt + 3.0 * tilt_se;
  return grid;
}

double RenewalSolution::at(double time) const {
  if (time < 0.0 || values.empty()) return 0.0;
  const double position = time / h;
  const auto k = static_cast<std::size_t>(position);
  if (k + 1 >= values.size()) return values.back();
  const double frac = position - static_cast<double>(k);
  return values[k] + frac * (values[k + 1] - values[k]);
}

RenewalSolution solve_renewal(const MeasureGrid& grid,
                              const std::function<double(double)>& forcing) {
  RenewalSolution out;
  out.h = grid.h;
  const std::size_t n = grid.size();
  out.t.resize(n);
  out.forcing.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.t[k] = static_cast<double>(k) * grid.h;
    out.forcing[k] = forcing(out.t[k]);
  }
  const double cap = std::exp(2.0 * grid.t_max) + 1.0;
  out.values = recurrence(grid.mu_mass, out.forcing, cap);

  const MeasureGrid coarse = grid.coarsened();
  std::vector<double> coarse_forcing(coarse.size());
  for (std::size_t k = 0; k < coarse.size(); ++k) coarse_forcing[k] = out.forcing[std::min(2 * k, n - 1)];
  const std::vector<double> coarse_values = recurrence(coarse.mu_mass, coarse_forcing, cap);
  out.error_estimate.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    double reference;
    if (k % 2 == 0) {
      reference = coarse_values[k / 2];
    } else if (k / 2 + 1 < coarse_values.size()) {
      reference = 0.5 * (coarse_values[k / 2] + coarse_values[k / 2 + 1]);
    } else {
      reference = coarse_values[k / 2];
    }
    out.error_estimate[k] = std::abs(out.values[k] - reference);
  }
  out.mc_error.assign(n, 0.0);
  return out;
}

RenewalSolution variance_renewal(const MeasureGrid& grid, const RenewalSolution& mean_solution,
                                 const SplitLaw& law, Rng& rng, const VarianceRenewalOptions& options) {
  if (mean_solution.values.size() < grid.size() || std::abs(mean_solution.h - grid.h) > 1e-15) {
    throw std::invalid_argument("variance_renewal: mean solution does not cover the grid");
  }
  const std::size_t b = static_cast<std::size_t>(law.parts());
  // Pool of log-inverse sizes, one sorted run per draw. Parts beyond the grid
  // horizon never contribute (m(t) = 0 for t < 0) and are dropped.
  const double horizon = static_cast<double>(grid.size() - 1) * grid.h;
  std::vector<double> pool;
  std::vector<std::size_t> offsets{0};
  auto add_draw = [&](std::span<const double> v) {
    const std::size_t first = pool.size();
    for (double vj : v) {
      if (vj <= 0.0) continue;
      const double x = -std::log(vj);
      if (x <= horizon) pool.push_back(x);
    }
    std::sort(pool.begin() + static_cast<std::ptrdiff_t>(first), pool.end());
    offsets.push_back(pool.size());
  };
  if (law.is_deterministic()) {
    add_draw(law.weights());
  } else if (law.family() == Family::EmpiricalSamples && law.empirical_rows() <= options.draws) {
    for (std::size_t i = 0; i < law.empirical_rows(); ++i) add_draw(law.empirical_row(i));
  } else {
    std::vector<double> v(b);
    for (std::size_t s = 0; s < options.draws; ++s) {
      law.sample(rng, v);
      add_draw(v);
    }
  }
  const std::size_t draws = offsets.size() - 1;
  const bool exact = law.is_deterministic() || law.family() == Family::EmpiricalSamples;

  const std::size_t thin = std::max<std::size_t>(1, options.thin);
  std::vector<std::size_t> nodes;
  for (std::size_t k = 0; k < grid.size(); k += thin) nodes.push_back(k);
  if (nodes.back() != grid.size() - 1) nodes.push_back(grid.size() - 1);
  std::vector<double> h_value(nodes.size()), h_error(nodes.size());

  constexpr std::size_t kNodesPerChunk = 16;
  const std::size_t chunks = (nodes.size() + kNodesPerChunk - 1) / kNodesPerChunk;
  parallel_chunks(chunks, resolve_threads(options.threads), [&](std::size_t chunk) {
    const std::size_t end = std::min(nodes.size(), (chunk + 1) * kNodesPerChunk);
    for (std::size_t i = chunk * kNodesPerChunk; i < end; ++i) {
      const double t = static_cast<double>(nodes[i]) * grid.h;
      const double centre = 1.0 - mean_solution.at(t);
      double sum = 0.0;
      double sum_sq = 0.0;
      for (std::size_t s = 0; s < draws; ++s) {
        double y = centre;
        for (std::size_t j = offsets[s]; j < offsets[s + 1] && pool[j] <= t; ++j) {
          y += mean_solution.at(t - pool[j]);
        }
        const double y2 = y * y;
        sum += y2;
        sum_sq += y2 * y2;
      }
      const double n = static_cast<double>(draws);
      h_value[i] = sum / n;
      h_error[i] = exact || draws < 2
                       ? 0.0
                       : 3.0 * std::sqrt(std::max(0.0, sum_sq / n - h_value[i] * h_value[i]) / (n - 1.0));
    }
  });

  auto interpolate = [&](const std::vector<double>& values) {
    return [&grid, &nodes, &values](double t) {
      const double position = t / grid.h;
      auto it = std::upper_bound(nodes.begin(), nodes.end(), static_cast<std::size_t>(std::max(0.0, position)));
      if (it == nodes.end()) return values.back();
      const std::size_t hi = static_cast<std::size_t>(it - nodes.begin());
      if (hi == 0) return values.front();
      const std::size_t lo = hi - 1;
      const double frac = (position - static_cast<double>(nodes[lo])) /
                          static_cast<double>(nodes[hi] - nodes[lo]);
      return values[lo] + frac * (values[hi] - values[lo]);
    };
  };
  RenewalSolution out = solve_renewal(grid, interpolate(h_value));
  if (!exact) out.mc_error = solve_renewal(grid, interpolate(h_error)).values;
  return out;
}

}  // namespace fragtree

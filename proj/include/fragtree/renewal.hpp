#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "fragtree/rng.hpp"
#include "fragtree/split_law.hpp"

namespace fragtree {

class RenewalInstability : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The measure mu = sum_j law(-ln V_j) binned on a grid of step h. Bin k holds
/// mu((kh - h/2, kh + h/2]); bin 0 holds mu([0, h/2]).
struct MeasureGrid {
  double h = 1e-3;
  double t_max = 10.0;
  std::vector<double> mu_mass;
  /// Mass of mu on the whole half-line, E |{j : V_j > 0}|.
  double total_mass = 0.0;
  /// sum_k mu_mass[k] e^{-kh}; the tilted measure is a probability measure so
  /// this should be close to 1.
  double tilt_check = 0.0;
  /// Bound on |tilt_check - 1| from truncation at t_max, binning and sampling.
  double tilt_error = 0.0;
  bool monte_carlo = false;
  std::size_t n_samples = 0;

  std::size_t size() const { return mu_mass.size(); }
  /// Same measure on the 2h grid.
  MeasureGrid coarsened() const;
};

inline constexpr double kDefaultRenewalStep = 1e-3;
inline constexpr double kDefaultRenewalHorizon = 10.0;

/// Exact bin masses from the family's distribution function where one exists
/// (all built-in families, and the finite empirical law); Monte Carlo binning
/// over `n_samples` split vectors when `force_monte_carlo` is set.
MeasureGrid discretize_measure(const SplitLaw& law, double h, double t_max,
                               std::size_t n_samples, Rng& rng, bool force_monte_carlo = false);

struct RenewalSolution {
  double h = 0.0;
  std::vector<double> t;
  std::vector<double> values;
  std::vector<double> forcing;
  /// Discretisation error, |F_h - F_2h| at each grid point.
  std::vector<double> error_estimate;
  /// Monte Carlo error propagated from the forcing (variance equation only).
  std::vector<double> mc_error;

  /// Linear interpolation; zero for t < 0, last value beyond the grid.
  double at(double t) const;
};

/// Forward recurrence F_k = f_k + sum_j mu_mass[j] F_{k-j}, with the bin-0
/// term moved to the left-hand side.
RenewalSolution solve_renewal(const MeasureGrid& grid, const std::function<double(double)>& forcing);

struct VarianceRenewalOptions {
  std::size_t draws = 100'000;
  /// h(t) is estimated on every `thin`-th grid point and interpolated.
  std::size_t thin = 10;
  int threads = 0;
};

/// Variance sigma^2(t) = Var N(e^t) from sigma^2 = mu * sigma^2 + h with
/// h(t) = E (sum_j m(t - X_j) + 1 - m(t))^2 estimated from one common pool of
/// split vectors.
RenewalSolution variance_renewal(const MeasureGrid& grid, const RenewalSolution& mean_solution,
                                 const SplitLaw& law, Rng& rng,
                                 const VarianceRenewalOptions& options = {});

}  // namespace fragtree

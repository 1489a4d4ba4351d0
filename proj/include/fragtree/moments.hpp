#pragma once

#include <cstdint>
#include <optional>

namespace fragtree {

/// Single-pass central moments up to order four with an associative merge
/// (pairwise update formulas), so chunked parallel sums can be combined.
class MomentAccumulator {
 public:
  void add(double value);
  void merge(const MomentAccumulator& other);

  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  /// Unbiased sample variance; absent for fewer than two values.
  std::optional<double> variance() const;
  /// Central moments normalised by n.
  double central_moment2() const { return n_ ? m2_ / static_cast<double>(n_) : 0.0; }
  double central_moment3() const { return n_ ? m3_ / static_cast<double>(n_) : 0.0; }
  double central_moment4() const { return n_ ? m4_ / static_cast<double>(n_) : 0.0; }
  std::optional<double> skewness() const;
  std::optional<double> excess_kurtosis() const;
  /// sqrt(variance / n).
  std::optional<double> standard_error() const;
  double min() const { return min_; }
  double max() const { return max_; }

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double m3_ = 0.0;
  double m4_ = 0.0;
  double min_ = 0.0;
  double max_ = 0.0;
};

}  // namespace fragtree

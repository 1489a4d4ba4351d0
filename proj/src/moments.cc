#include "fragtree/moments.hpp"

#include <algorithm>
#include <cmath>

namespace fragtree {

void MomentAccumulator::add(double value) {
  MomentAccumulator single;
  single.n_ = 1;
  single.mean_ = value;
  single.min_ = value;
  single.max_ = value;
  merge(single);
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double n = na + nb;
  const double delta = other.mean_ - mean_;
  const double delta_n = delta / n;
  const double delta_n2 = delta_n * delta_n;
  const double cross = delta * delta_n * na * nb;

  const double m4 = m4_ + other.m4_ + cross * delta_n2 * (na * na - na * nb + nb * nb) +
                    6.0 * delta_n2 * (na * na * other.m2_ + nb * nb * m2_) +
                    4.0 * delta_n * (na * other.m3_ - nb * m3_);
  const double m3 = m3_ + other.m3_ + cross * delta_n * (na - nb) +
                    3.0 * delta_n * (na * other.m2_ - nb * m2_);
  m2_ = m2_ + other.m2_ + cross;
  m3_ = m3;
  m4_ = m4;
  mean_ += delta_n * nb;
  n_ += other.n_;
  min_ = std::min(min_, other.min_);
  max_ = std::max(max_, other.max_);
}

std::optional<double> MomentAccumulator::variance() const {
  if (n_ < 2) return std::nullopt;
  return std::max(0.0, m2_ / static_cast<double>(n_ - 1));
}

std::optional<double> MomentAccumulator::skewness() const {
  if (n_ < 2 || m2_ <= 0.0) return std::nullopt;
  const double n = static_cast<double>(n_);
  return std::sqrt(n) * m3_ / std::pow(m2_, 1.5);
}

std::optional<double> MomentAccumulator::excess_kurtosis() const {
  if (n_ < 2 || m2_ <= 0.0) return std::nullopt;
  const double n = static_cast<double>(n_);
  return n * m4_ / (m2_ * m2_) - 3.0;
}

std::optional<double> MomentAccumulator::standard_error() const {
  const auto var = variance();
  if (!var) return std::nullopt;
  return std::sqrt(*var / static_cast<double>(n_));
}

}  // namespace fragtree

#include "fragtree/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fragtree {

double wasserstein2(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("wasserstein2: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double u = 0.0;
  double total = 0.0;
  while (i < a.size() && j < b.size()) {
    // Next breakpoint compared exactly in integer arithmetic: (i+1)/n vs (j+1)/m.
    const auto lhs = static_cast<unsigned long long>(i + 1) * b.size();
    const auto rhs = static_cast<unsigned long long>(j + 1) * a.size();
    const double next = lhs <= rhs ? static_cast<double>(i + 1) / n : static_cast<double>(j + 1) / m;
    const double diff = a[i] - b[j];
    total += (next - u) * diff * diff;
    u = next;
    if (lhs <= rhs) ++i;
    if (rhs <= lhs) ++j;
  }
  return std::sqrt(std::max(0.0, total));
}

double sliced_wasserstein2(std::span<const Complex> a, std::span<const Complex> b, int directions) {
  if (directions < 1) throw std::invalid_argument("sliced_wasserstein2: need a direction");
  double total = 0.0;
  std::vector<double> pa(a.size()), pb(b.size());
  for (int d = 0; d < directions; ++d) {
    const Complex rotation = std::polar(1.0, -std::numbers::pi * d / directions);
    for (std::size_t i = 0; i < a.size(); ++i) pa[i] = (a[i] * rotation).real();
    for (std::size_t i = 0; i < b.size(); ++i) pb[i] = (b[i] * rotation).real();
    const double w = wasserstein2(pa, pb);
    total += w * w;
  }
  return std::sqrt(total / directions);
}

}  // namespace fragtree

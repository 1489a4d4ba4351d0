#pragma once

#include <span>
#include <vector>

#include "fragtree/special_functions.hpp"

namespace fragtree {

/// Order-2 Wasserstein distance between two empirical distributions on the
/// line, exact for any sample sizes: the quantile functions are matched on
/// the merged grid of breakpoints i/n and j/m.
double wasserstein2(std::vector<double> a, std::vector<double> b);

/// Root-mean-square of the 1D distances between projections
/// Re(z e^{-i theta}) over `directions` equally spaced angles in [0, pi).
/// A lower bound on the planar distance; used to monitor iterates.
double sliced_wasserstein2(std::span<const Complex> a, std::span<const Complex> b,
                           int directions = 16);

}  // namespace fragtree

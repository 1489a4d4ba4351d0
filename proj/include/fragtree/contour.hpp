#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fragtree/special_functions.hpp"

namespace fragtree {

/// An analytic function together with its derivative.
struct AnalyticFunction {
  std::function<Complex(Complex)> value;
  std::function<Complex(Complex)> derivative;
};

struct Rectangle {
  double re_min = 0.0;
  double re_max = 0.0;
  double im_min = 0.0;
  double im_max = 0.0;

  double width() const { return re_max - re_min; }
  double height() const { return im_max - im_min; }
  Complex center() const { return {0.5 * (re_min + re_max), 0.5 * (im_min + im_max)}; }
  bool contains(Complex z, double margin = 0.0) const {
    return z.real() >= re_min - margin && z.real() <= re_max + margin &&
           z.imag() >= im_min - margin && z.imag() <= im_max + margin;
  }
};

/// Raised when a zero of the function lies on (or numerically on) a contour.
class ContourHitsZero : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CountMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Number of zeros inside the rectangle from the accumulated change of
/// arg f along its boundary. Segments are refined until the phase step is
/// below pi/4 and shorter than the Newton distance |f/f'| at both ends.
int phase_winding(const AnalyticFunction& f, const Rectangle& rect);

/// Same count around a circle (used for multiplicity certificates).
int circle_winding(const AnalyticFunction& f, Complex center, double radius);

/// (1 / 2 pi i) * closed integral of f'/f by the trapezoid rule, starting at
/// `initial_points` per edge and doubling until the estimate is within 0.25
/// of an integer and agrees with the previous level. Throws CountMismatch if
/// it never stabilises.
int trapezoid_winding(const AnalyticFunction& f, const Rectangle& rect, int initial_points = 512,
                      int max_points = 1 << 17);

struct IsolatedZero {
  Complex z;
  int multiplicity = 1;
};

struct IsolationOptions {
  /// Cells smaller than this that still hold >= 2 zeros are reported as one
  /// multiple zero.
  double min_cell = 1e-7;
  int max_depth = 80;
};

/// Recursive bisection of `rect` until each cell holds at most one zero,
/// followed by Newton refinement inside the cell.
std::vector<IsolatedZero> isolate_zeros(const AnalyticFunction& f, const Rectangle& rect,
                                        const IsolationOptions& options = {});

/// Newton iteration from `start`; nullopt if it fails to converge.
std::optional<Complex> newton_refine(const AnalyticFunction& f, Complex start,
                                     int max_iterations = 80);

}  // namespace fragtree

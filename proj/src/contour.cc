#include "fragtree/contour.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <optional>

namespace fragtree {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMaxPhaseStep = kPi / 4.0;
constexpr double kZeroOnContour = 1e-13;

struct Sample {
  Complex z;
  Complex f;
  double newton_distance;
};

Sample evaluate(const AnalyticFunction& f, Complex z) {
  const Complex value = f.value(z);
  if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
    throw ContourHitsZero("contour: function not finite on contour");
  }
  if (std::abs(value) < kZeroOnContour) throw ContourHitsZero("contour passes through a zero");
  const Complex slope = f.derivative(z);
  const double distance = std::abs(slope) > 0.0 ? std::abs(value) / std::abs(slope) : 1e300;
  return {z, value, distance};
}

// Accumulated arg change of f along the straight segment from a to b.
double segment_phase(const AnalyticFunction& f, const Sample& a, const Sample& b, int depth) {
  const double step = std::arg(b.f / a.f);
  const double length = std::abs(b.z - a.z);
  const bool fine = std::abs(step) < kMaxPhaseStep &&
                    length <= std::min(a.newton_distance, b.newton_distance);
  if (fine) return step;
  if (depth > 60 || length < 1e-14 * std::max(1.0, std::abs(a.z))) {
    throw ContourHitsZero("contour: cannot resolve phase near a zero");
  }
  const Sample mid = evaluate(f, 0.5 * (a.z + b.z));
  return segment_phase(f, a, mid, depth + 1) + segment_phase(f, mid, b, depth + 1);
}

double polygon_phase(const AnalyticFunction& f, const std::vector<Complex>& vertices,
                     int points_per_edge) {
  double total = 0.0;
  const std::size_t n = vertices.size();
  for (std::size_t e = 0; e < n; ++e) {
    const Complex from = vertices[e];
    const Complex to = vertices[(e + 1) % n];
    Sample prev = evaluate(f, from);
    for (int k = 1; k <= points_per_edge; ++k) {
      const Complex z = from + (to - from) * (static_cast<double>(k) / points_per_edge);
      const Sample next = evaluate(f, z);
      total += segment_phase(f, prev, next, 0);
      prev = next;
    }
  }
  return total;
}

int round_winding(double phase) {
  const double turns = phase / (2.0 * kPi);
  const double rounded = std::round(turns);
  if (std::abs(turns - rounded) > 1e-6) {
    throw ContourHitsZero("contour: accumulated phase is not a whole number of turns");
  }
  return static_cast<int>(rounded);
}

std::array<Complex, 4> corners(const Rectangle& r) {
  return {Complex(r.re_min, r.im_min), Complex(r.re_max, r.im_min), Complex(r.re_max, r.im_max),
          Complex(r.re_min, r.im_max)};
}

// Split fractions tried in order; off-centre so symmetric zeros (for example
// on the real axis) do not land on the cut.
constexpr std::array<double, 5> kSplitFractions = {0.5371, 0.4629, 0.6113, 0.3887, 0.5093};

void isolate(const AnalyticFunction& f, const Rectangle& rect, int count, int depth,
             const IsolationOptions& options, std::vector<IsolatedZero>& out) {
  if (count <= 0) return;
  const double size = std::max(rect.width(), rect.height());
  if (count == 1) {
    if (auto z = newton_refine(f, rect.center())) {
      if (rect.contains(*z, 1e-12 * std::max(1.0, std::abs(*z)))) {
        out.push_back({*z, 1});
        return;
      }
    }
  }
  if (count >= 2 && size < options.min_cell) {
    const Complex z = newton_refine(f, rect.center()).value_or(rect.center());
    out.push_back({z, count});
    return;
  }
  if (depth > options.max_depth) {
    throw CountMismatch("isolate_zeros: recursion limit reached");
  }
  const bool split_real = rect.width() >= rect.height();
  for (double fraction : kSplitFractions) {
    Rectangle left = rect;
    Rectangle right = rect;
    if (split_real) {
      const double cut = rect.re_min + fraction * rect.width();
      left.re_max = cut;
      right.re_min = cut;
    } else {
      const double cut = rect.im_min + fraction * rect.height();
      left.im_max = cut;
      right.im_min = cut;
    }
    int left_count = 0;
    int right_count = 0;
    try {
      left_count = phase_winding(f, left);
      right_count = phase_winding(f, right);
    } catch (const ContourHitsZero&) {
      continue;
    }
    if (left_count + right_count != count || left_count < 0 || right_count < 0) continue;
    isolate(f, left, left_count, depth + 1, options, out);
    isolate(f, right, right_count, depth + 1, options, out);
    return;
  }
  throw CountMismatch("isolate_zeros: could not split cell without crossing a zero");
}

}  // namespace

int phase_winding(const AnalyticFunction& f, const Rectangle& rect) {
  const auto c = corners(rect);
  return round_winding(polygon_phase(f, {c.begin(), c.end()}, 8));
}

int circle_winding(const AnalyticFunction& f, Complex center, double radius) {
  constexpr int kVertices = 64;
  std::vector<Complex> vertices;
  vertices.reserve(kVertices);
  for (int k = 0; k < kVertices; ++k) {
    vertices.push_back(center + std::polar(radius, 2.0 * kPi * k / kVertices));
  }
  return round_winding(polygon_phase(f, vertices, 1));
}

int trapezoid_winding(const AnalyticFunction& f, const Rectangle& rect, int initial_points,
                      int max_points) {
  const auto c = corners(rect);
  auto integrate = [&](int points) {
    Complex total = 0.0;
    for (int e = 0; e < 4; ++e) {
      const Complex from = c[e];
      const Complex to = c[(e + 1) % 4];
      const Complex dz = (to - from) / static_cast<double>(points);
      for (int k = 0; k <= points; ++k) {
        const Complex z = from + dz * static_cast<double>(k);
        const double weight = (k == 0 || k == points) ? 0.5 : 1.0;
        total += weight * f.derivative(z) / f.value(z) * dz;
      }
    }
    return total / Complex(0.0, 2.0 * kPi);
  };
  std::optional<long> previous;
  for (int points = initial_points; points <= max_points; points *= 2) {
    const Complex w = integrate(points);
    const double rounded = std::round(w.real());
    const bool integral = std::abs(w.real() - rounded) < 0.25 && std::abs(w.imag()) < 0.25;
    if (integral && previous && *previous == static_cast<long>(rounded)) {
      return static_cast<int>(rounded);
    }
    previous = integral ? std::optional<long>(static_cast<long>(rounded)) : std::nullopt;
  }
  throw CountMismatch("trapezoid_winding: contour integral did not stabilise");
}

std::optional<Complex> newton_refine(const AnalyticFunction& f, Complex start, int max_iterations) {
  Complex z = start;
  try {
    for (int it = 0; it < max_iterations; ++it) {
      const Complex value = f.value(z);
      const Complex slope = f.derivative(z);
      if (!std::isfinite(std::abs(value)) || std::abs(slope) == 0.0) return std::nullopt;
      const Complex step = value / slope;
      z -= step;
      if (!std::isfinite(std::abs(z))) return std::nullopt;
      if (std::abs(step) <= 4e-16 * std::max(1.0, std::abs(z))) return z;
    }
    // Accept a slow (multiple-zero) convergence only if the residual is tiny.
    if (std::abs(f.value(z)) < 1e-10) return z;
  } catch (const std::domain_error&) {
    // Iterate left the domain of the transform.
  }
  return std::nullopt;
}

std::vector<IsolatedZero> isolate_zeros(const AnalyticFunction& f, const Rectangle& rect,
                                        const IsolationOptions& options) {
  std::vector<IsolatedZero> out;
  const int count = phase_winding(f, rect);
  isolate(f, rect, count, 0, options, out);
  return out;
}

}  // namespace fragtree

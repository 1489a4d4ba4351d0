#include "fragtree/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fragtree/contour.hpp"
#include "fragtree/polynomial.hpp"
#include "fragtree/quadrature.hpp"

namespace fragtree {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRealAxisSnap = 1e-12;
constexpr double kRightEdge = 1.05;
constexpr double kMultiplicityCircle = 1e-4;

AnalyticFunction characteristic_function(const SplitLaw& law) {
  return {[&law](Complex z) { return phi(law, z).value - 1.0; },
          [&law](Complex z) { return phi_prime(law, z).value; }};
}

// phi(z) = 1 with denominators cleared: D(z) - N(z) = 0.
Polynomial characteristic_polynomial(const SplitLaw& law) {
  switch (law.family()) {
    case Family::BinaryUniform:
      return Polynomial({-1.0, 1.0});
    case Family::MaryUniform:
    case Family::SimplexSplit: {
      const int m = law.parts();
      std::vector<double> shifts;
      double factorial = 1.0;
      for (int k = 1; k < m; ++k) shifts.push_back(-static_cast<double>(k));
      for (int k = 2; k <= m; ++k) factorial *= k;
      return Polynomial::from_real_roots(shifts) - Polynomial({factorial});
    }
    case Family::QuadSplit: {
      const int d = law.order();
      std::vector<double> shifts(static_cast<std::size_t>(d), -1.0);
      return Polynomial::from_real_roots(shifts) - Polynomial({std::ldexp(1.0, d)});
    }
    default:
      throw PreconditionError("characteristic_polynomial: law has no rational phi");
  }
}

// Real parts are compared on a 1e-10 lattice so that roots on a common
// vertical line order by |Im| despite rounding.
bool sort_before(const Root& a, const Root& b) {
  const double ra = std::round(a.lambda.real() * 1e10);
  const double rb = std::round(b.lambda.real() * 1e10);
  if (ra != rb) return ra > rb;
  if (std::abs(a.lambda.imag()) != std::abs(b.lambda.imag())) {
    return std::abs(a.lambda.imag()) < std::abs(b.lambda.imag());
  }
  return a.lambda.imag() > b.lambda.imag();
}

// Snaps near-real roots onto the axis and replaces each lower-half root by the
// exact conjugate of its upper-half partner.
std::vector<Complex> symmetrize(std::vector<Complex> zs, std::vector<std::string>& warnings) {
  std::vector<Complex> out;
  std::vector<bool> used(zs.size(), false);
  for (std::size_t i = 0; i < zs.size(); ++i) {
    if (std::abs(zs[i].imag()) <= kRealAxisSnap * std::max(1.0, std::abs(zs[i]))) {
      out.emplace_back(zs[i].real(), 0.0);
      used[i] = true;
    }
  }
  for (std::size_t i = 0; i < zs.size(); ++i) {
    if (used[i] || zs[i].imag() < 0.0) continue;
    used[i] = true;
    out.push_back(zs[i]);
    std::size_t best = zs.size();
    double best_distance = 1e-6 * std::max(1.0, std::abs(zs[i]));
    for (std::size_t k = 0; k < zs.size(); ++k) {
      if (used[k] || zs[k].imag() >= 0.0) continue;
      const double distance = std::abs(zs[k] - std::conj(zs[i]));
      if (distance < best_distance) {
        best_distance = distance;
        best = k;
      }
    }
    if (best < zs.size()) used[best] = true;
    out.push_back(std::conj(zs[i]));
  }
  for (std::size_t i = 0; i < zs.size(); ++i) {
    if (!used[i]) {
      warnings.push_back("root without conjugate partner; conjugate added");
      out.push_back(zs[i]);
      out.push_back(std::conj(zs[i]));
      used[i] = true;
    }
  }
  return out;
}

struct Candidate {
  Complex z;
  int multiplicity;
};

// Merges numerically coincident roots into one entry with a multiplicity.
std::vector<Candidate> merge_coincident(const std::vector<Complex>& zs) {
  std::vector<Candidate> out;
  for (Complex z : zs) {
    bool merged = false;
    for (auto& c : out) {
      if (std::abs(c.z - z) < 1e-7 * std::max(1.0, std::abs(z))) {
        c.multiplicity += 1;
        merged = true;
        break;
      }
    }
    if (!merged) out.push_back({z, 1});
  }
  return out;
}

Root describe_root(const SplitLaw& law, const AnalyticFunction& f, Complex z, int multiplicity) {
  Root root;
  root.lambda = z;
  root.multiplicity = multiplicity;
  const TransformValue value = phi(law, z);
  const TransformValue slope = phi_prime(law, z);
  root.residual = std::abs(value.value - 1.0);
  root.phi_prime = slope.value;
  const double slope_abs = std::abs(slope.value);
  root.error_estimate = slope_abs > 0.0 ? (root.residual + value.error_bound) / slope_abs : 1e300;
  bool single = false;
  if (multiplicity == 1 && slope_abs > kConditioningThreshold) {
    try {
      single = circle_winding(f, z, kMultiplicityCircle) == 1;
    } catch (const ContourHitsZero&) {
      single = false;
    }
  }
  root.simple_certified = single;
  return root;
}

bool in_strip(Complex z, const Strip& strip) {
  return z.real() >= strip.delta && z.real() <= 1.0 + 1e-9 && std::abs(z.imag()) <= strip.imag_bound;
}

void finalize(const SplitLaw& law, const AnalyticFunction& f, const std::vector<Complex>& zeros,
              Spectrum& spectrum, std::vector<Root>& target) {
  for (const auto& c : merge_coincident(symmetrize(zeros, spectrum.warnings))) {
    Root root = describe_root(law, f, c.z, c.multiplicity);
    if (root.residual > spectrum.tol) {
      throw SpectralError("find_roots: refined root residual " + std::to_string(root.residual) +
                          " exceeds tolerance");
    }
    if (std::abs(root.phi_prime) < kConditioningThreshold) {
      spectrum.warnings.push_back("ill-conditioned root: |phi'(lambda)| < 1e-8");
    }
    target.push_back(root);
  }
  std::sort(target.begin(), target.end(), sort_before);
}

Spectrum roots_by_companion(const SplitLaw& law, Spectrum spectrum) {
  spectrum.method = RootMethod::CompanionMatrix;
  const AnalyticFunction f = characteristic_function(law);
  std::vector<Complex> refined;
  for (Complex z : characteristic_polynomial(law).roots()) {
    refined.push_back(newton_refine(f, z).value_or(z));
  }
  finalize(law, f, refined, spectrum, spectrum.full_plane_roots);
  for (const Root& root : spectrum.full_plane_roots) {
    if (in_strip(root.lambda, spectrum.strip)) spectrum.roots.push_back(root);
  }
  return spectrum;
}

Spectrum roots_by_argument_principle(const SplitLaw& law, Spectrum spectrum) {
  spectrum.method = RootMethod::ArgumentPrinciple;
  const AnalyticFunction f = characteristic_function(law);
  // Upper half plus a sliver below the real axis; lower-half roots come from
  // conjugation.
  constexpr double kBelowAxis = 0.0137;
  for (int attempt = 0; attempt < 6; ++attempt) {
    const double nudge = 1e-7 * (1.0 + 3.1 * attempt);
    Rectangle rect{spectrum.strip.delta - nudge, kRightEdge, -kBelowAxis - nudge,
                   spectrum.strip.imag_bound + nudge};
    std::vector<IsolatedZero> zeros;
    try {
      zeros = isolate_zeros(f, rect);
    } catch (const ContourHitsZero&) {
      continue;
    }
    int total = 0;
    std::vector<Complex> upper;
    for (const auto& zero : zeros) {
      total += zero.multiplicity;
      if (zero.z.imag() < -kRealAxisSnap * std::max(1.0, std::abs(zero.z))) continue;
      for (int k = 0; k < zero.multiplicity; ++k) upper.push_back(zero.z);
    }
    const int contour = trapezoid_winding(f, rect);
    if (contour != total) {
      throw CountMismatch("find_roots: isolated " + std::to_string(total) +
                          " roots but the contour integral counts " + std::to_string(contour));
    }
    spectrum.contour_count = contour;
    std::vector<Root> all;
    finalize(law, f, upper, spectrum, all);
    for (const Root& root : all) {
      if (in_strip(root.lambda, spectrum.strip)) spectrum.roots.push_back(root);
    }
    return spectrum;
  }
  throw SpectralError("find_roots: every bounding contour passed through a root");
}

double conj_symmetric_real(Complex value) { return value.real(); }

}  // namespace

std::string to_string(Phase phase) {
  switch (phase) {
    case Phase::Normal: return "Normal";
    case Phase::CriticalLine: return "CriticalLine";
    case Phase::Periodic: return "Periodic";
    case Phase::Degenerate: return "Degenerate";
  }
  return {};
}

Spectrum find_roots(const SplitLaw& law, double delta, double imag_bound, double tol) {
  if (!(delta > 0.0 && delta < 1.0)) throw PreconditionError("find_roots: need 0 < delta < 1");
  if (!(imag_bound > 0.0)) throw PreconditionError("find_roots: imag_bound must be positive");
  Spectrum spectrum;
  spectrum.strip = {delta, imag_bound};
  spectrum.tol = tol;
  spectrum.closed_form = law.family() != Family::EmpiricalSamples;
  Spectrum out = law.has_rational_phi() ? roots_by_companion(law, spectrum)
                                        : roots_by_argument_principle(law, spectrum);
  if (out.roots.empty() || std::abs(out.roots.front().lambda - 1.0) > 1e-8) {
    throw SpectralError("find_roots: lambda = 1 not recovered");
  }
  return out;
}

PhaseReport classify_phase(const Spectrum& spectrum) {
  PhaseReport report;
  double root_error = 0.0;
  for (const Root& root : spectrum.roots) root_error = std::max(root_error, root.error_estimate);
  report.tol = spectrum.closed_form ? 1e-9 : std::max(1e-9, root_error);
  if (spectrum.roots.size() < 2) {
    report.phase = Phase::Normal;
    report.note = "lambda = 1 is the only root in the strip";
    if (!spectrum.roots.empty() && spectrum.roots.front().multiplicity > 1) {
      report.phase = Phase::Degenerate;
      report.note = "lambda = 1 is not simple";
    }
    return report;
  }
  const Root& second = spectrum.roots[1];
  report.lambda2 = second.lambda;
  report.sigma2 = second.lambda.real();
  report.tau2 = std::abs(second.lambda.imag());
  for (std::size_t i = 1; i < spectrum.roots.size(); ++i) {
    const Root& root = spectrum.roots[i];
    if (std::abs(root.lambda.real() - report.sigma2) <= report.tol) {
      report.line_roots.push_back({root.lambda, root.multiplicity == 1 && root.simple_certified});
    }
  }
  report.near_boundary = std::abs(report.sigma2 - 0.5) < 1e-2;
  if (spectrum.roots.front().multiplicity > 1) {
    report.phase = Phase::Degenerate;
    report.note = "lambda = 1 is not simple";
    return report;
  }
  if (std::abs(report.sigma2 - 1.0) <= report.tol) {
    report.phase = Phase::Degenerate;
    report.note = "further roots on Re lambda = 1: lattice split law";
    return report;
  }
  if (report.sigma2 < 0.5 - report.tol) {
    report.phase = Phase::Normal;
    return report;
  }
  report.phase = report.sigma2 > 0.5 + report.tol ? Phase::Periodic : Phase::CriticalLine;
  const bool all_simple = std::all_of(report.line_roots.begin(), report.line_roots.end(),
                                      [](const LineRootCertificate& c) { return c.simple; });
  if (!all_simple) {
    report.note = "root on the Re lambda_2 line is not certified simple";
    report.phase = Phase::Degenerate;
  }
  return report;
}

double MomentModel::mean(double x) const {
  if (x < 1.0) return 0.0;
  const auto& terms = exact_terms.empty() ? a_coeffs : exact_terms;
  Complex total = a0 && !exact_terms.empty() ? Complex(*a0, 0.0) : Complex(0.0, 0.0);
  const double log_x = std::log(x);
  for (const auto& term : terms) total += term.coefficient * std::exp(term.lambda * log_x);
  return total.real();
}

MomentModel mean_expansion(const SplitLaw& law, const Spectrum& spectrum) {
  MomentModel model;
  model.alpha = -phi_prime(law, 1.0).value.real();
  auto coefficient = [&law](const Root& root) {
    if (root.multiplicity != 1 || std::abs(root.phi_prime) < kConditioningThreshold) {
      throw NonSimpleRootError("mean_expansion: root is not simple");
    }
    return ExpansionTerm{root.lambda, -1.0 / (root.lambda * phi_prime(law, root.lambda).value)};
  };
  for (const Root& root : spectrum.roots) model.a_coeffs.push_back(coefficient(root));
  if (!spectrum.full_plane_roots.empty()) {
    for (const Root& root : spectrum.full_plane_roots) model.exact_terms.push_back(coefficient(root));
    model.a0 = -1.0 / (law.positive_part_count() - 1.0);
  }
  const PhaseReport phase = classify_phase(spectrum);
  model.phase = phase.phase;
  model.lambda2 = phase.lambda2;
  if (phase.phase == Phase::Periodic) {
    // a_2 x^{lambda_2} + conj = Re(2 a_2 x^{lambda_2}).
    model.gamma = 2.0 * model.a_coeffs.at(1).coefficient;
    model.kappa = 0.5 * (0.5 + phase.sigma2);
  }
  return model;
}

Estimate beta_normal(const SplitLaw& law, const Spectrum& spectrum) {
  const PhaseReport phase = classify_phase(spectrum);
  if (phase.phase != Phase::Normal) throw PreconditionError("beta_normal: phase is not Normal");
  if (!(spectrum.strip.delta < 0.5)) throw PreconditionError("beta_normal: need delta < 1/2");
  const double alpha = -phi_prime(law, 1.0).value.real();
  auto integrand = [&law](double u) {
    const Complex z(0.5, u);
    const double numerator = psi(law, z, std::conj(z)).value.real();
    const double gap = std::abs(1.0 - phi(law, z).value);
    return numerator / (std::norm(z) * gap * gap);
  };
  const double scale = 1.0 / (alpha * kPi);
  const double psi_bound = static_cast<double>(law.parts());
  double integral = 0.0;
  double error = 0.0;
  double lower = 0.0;
  double upper = 1.0;
  constexpr double kMaxUpper = 1e12;
  while (true) {
    const QuadratureResult panel = integrate_adaptive(integrand, lower, upper, 1e-11);
    integral += panel.value;
    error += panel.error;
    // Heuristic sup of |phi(1/2 + iu)| beyond the cut-off.
    const ConditionBReport scan = check_condition_b(law, 0.5, 8.0 * upper, upper / 64.0, upper);
    const double sup = scan.sup_estimate;
    if (sup < 1.0 && upper >= 64.0) {
      const double tail = scale * psi_bound / ((1.0 - sup) * (1.0 - sup) * upper);
      if (tail < 1e-6 * scale * integral) {
        error += tail;
        break;
      }
    }
    if (upper >= kMaxUpper) throw QuadratureFailure("beta_normal: tail bound did not converge");
    lower = upper;
    upper *= 2.0;
  }
  Estimate beta{scale * integral, scale * error};
  if (!(beta.value > 0.0)) {
    throw SpectralError("beta_normal: non-positive variance constant (degenerate law?)");
  }
  if (beta.error > 0.01 * beta.value) {
    throw QuadratureFailure("beta_normal: error bound exceeds 1% of the value");
  }
  return beta;
}

Estimate beta_rational(const SplitLaw& law, const MomentModel& model, std::size_t mc_samples,
                       std::uint64_t seed) {
  if (!law.has_rational_phi() || model.exact_terms.empty() || !model.a0) {
    throw PreconditionError("beta_rational: needs rational phi and the exact root expansion");
  }
  if (!law.all_parts_positive()) throw PreconditionError("beta_rational: needs V_j > 0 a.s.");
  const double alpha = model.alpha;
  // Index set: lambda_0 = 0 with a_0 = -1/(b - 1), then every root except 1.
  struct Term {
    Complex lambda;
    Complex a;
  };
  std::vector<Term> terms;
  terms.push_back({0.0, -1.0 / (static_cast<double>(law.parts()) - 1.0)});
  bool found_one = false;
  for (const auto& t : model.exact_terms) {
    if (std::abs(t.lambda - 1.0) < 1e-9) {
      found_one = true;
      continue;
    }
    if (t.lambda.real() >= 0.5) {
      throw PreconditionError("beta_rational: needs Re lambda_i < 1/2 for i >= 2");
    }
    terms.push_back({t.lambda, t.coefficient});
  }
  if (!found_one) throw PreconditionError("beta_rational: lambda_1 = 1 missing");
  const Complex a0 = terms.front().a;

  // beta = const + E[Y] with Y linear in the per-sample cross moments.
  Complex constant = 0.0;
  for (const auto& ti : terms) {
    for (const auto& tk : terms) {
      const Complex w = ti.a * tk.a / (1.0 - ti.lambda - tk.lambda);
      constant += w * (-2.0 * phi(law, 1.0 - tk.lambda).value + 1.0) / alpha;
    }
  }
  for (std::size_t i = 1; i < terms.size(); ++i) {
    constant += -2.0 / (alpha * alpha) * terms[i].a / terms[i].lambda *
                (-phi(law, 1.0 - terms[i].lambda).value + 1.0);
  }
  constant += -2.0 / (alpha * alpha) * a0 * (-alpha);
  constant += -1.0 / (alpha * alpha * alpha) - 1.0 / alpha;

  const bool binary_closed_form =
      law.family() == Family::BinaryUniform ||
      (law.family() == Family::MaryUniform && law.parts() == 2) ||
      (law.family() == Family::SimplexSplit && law.parts() == 2);
  if (binary_closed_form) {
    // Only lambda_0 survives: sum_{j,l} E(V_j ^ V_l) = 3/2 and
    // sum_{j,l} E V_l (ln V_j - ln V_l) 1{V_l < V_j} = ln 2 - 1/2.
    const double min_sum = 1.5;
    const double log_sum = std::log(2.0) - 0.5;
    const Complex value = constant + a0 * a0 * min_sum / alpha -
                          2.0 / (alpha * alpha) * a0 * log_sum +
                          min_sum / (alpha * alpha * alpha);
    return {value.real(), 0.0};
  }

  Rng rng(seed);
  const std::size_t b = static_cast<std::size_t>(law.parts());
  std::vector<double> v(b), logs(b);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t s = 0; s < mc_samples; ++s) {
    law.sample(rng, v);
    for (std::size_t j = 0; j < b; ++j) logs[j] = std::log(v[j]);
    Complex y = 0.0;
    for (std::size_t j = 0; j < b; ++j) {
      for (std::size_t l = 0; l < b; ++l) {
        const double log_min = std::min(logs[j], logs[l]);
        for (const auto& ti : terms) {
          for (const auto& tk : terms) {
            const Complex w = ti.a * tk.a / (1.0 - ti.lambda - tk.lambda) / alpha;
            y += w * std::exp(ti.lambda * logs[j] + tk.lambda * logs[l] +
                              (1.0 - ti.lambda - tk.lambda) * log_min);
          }
        }
        if (v[l] <= v[j]) {
          for (std::size_t i = 1; i < terms.size(); ++i) {
            const Complex w = -2.0 / (alpha * alpha) * terms[i].a / terms[i].lambda;
            y += w * (std::exp(terms[i].lambda * logs[j] + (1.0 - terms[i].lambda) * logs[l]) - v[l]);
          }
        }
        if (v[l] < v[j]) y += -2.0 / (alpha * alpha) * a0 * v[l] * (logs[j] - logs[l]);
        y += std::min(v[j], v[l]) / (alpha * alpha * alpha);
      }
    }
    const double yr = conj_symmetric_real(y);
    sum += yr;
    sum_sq += yr * yr;
  }
  const double n = static_cast<double>(mc_samples);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * mean * mean) / std::max(1.0, n - 1.0));
  return {constant.real() + mean, 3.0 * std::sqrt(var / n)};
}

CriticalBeta beta_critical(const SplitLaw& law, const Spectrum& spectrum, double line_tol) {
  const double alpha = -phi_prime(law, 1.0).value.real();
  CriticalBeta result;
  for (const Root& root : spectrum.roots) {
    if (std::abs(root.lambda.real() - 0.5) > line_tol) continue;
    if (root.multiplicity != 1 || std::abs(root.phi_prime) < kConditioningThreshold) {
      throw NonSimpleRootError("beta_critical: critical root is not simple");
    }
    const double psi_value = psi(law, root.lambda, std::conj(root.lambda)).value.real();
    const double contribution = psi_value / (alpha * std::norm(root.lambda * root.phi_prime));
    result.terms.push_back({root.lambda, psi_value, contribution});
    result.value += contribution;
  }
  if (result.terms.empty()) throw PreconditionError("beta_critical: no root on Re lambda = 1/2");
  return result;
}

double PeriodicVariance::predict(double x) const {
  const double log_x = std::log(x);
  Complex total = 0.0;
  for (const auto& term : terms) {
    total += term.coefficient * std::exp((term.lambda_i + term.lambda_k) * log_x);
  }
  return total.real();
}

PeriodicVariance variance_periodic(const SplitLaw& law, const Spectrum& spectrum) {
  const PhaseReport phase = classify_phase(spectrum);
  if (phase.phase != Phase::Periodic) throw PreconditionError("variance_periodic: phase is not Periodic");
  PeriodicVariance result;
  for (const auto& ci : phase.line_roots) {
    for (const auto& ck : phase.line_roots) {
      const Complex li = ci.lambda;
      const Complex lk = ck.lambda;
      const Complex phi_sum = phi(law, li + lk).value;
      if (std::abs(1.0 - phi_sum) < 1e-12) {
        throw SpectralError("variance_periodic: phi(lambda_i + lambda_k) = 1 (pole)");
      }
      const Complex coefficient = psi(law, li, lk).value /
                                  (li * lk * phi_prime(law, li).value * phi_prime(law, lk).value *
                                   (1.0 - phi_sum));
      result.terms.push_back({li, lk, coefficient});
    }
  }
  return result;
}

std::optional<double> second_root_real_part(const SplitLaw& law, double delta, double imag_bound) {
  const Spectrum spectrum = find_roots(law, delta, imag_bound);
  if (spectrum.roots.size() < 2) return std::nullopt;
  return spectrum.roots[1].lambda.real();
}

PhaseCrossing locate_phase_crossing(const std::function<SplitLaw(double)>& make_law, double low,
                                    double high, double parameter_tol, double delta,
                                    double imag_bound) {
  PhaseCrossing result;
  auto excess = [&](double p) {
    ++result.evaluations;
    const auto sigma = second_root_real_part(make_law(p), delta, imag_bound);
    return sigma ? *sigma - 0.5 : -1.0;
  };
  double f_low = excess(low);
  const double f_high = excess(high);
  if ((f_low < 0.0) == (f_high < 0.0)) {
    throw PreconditionError("locate_phase_crossing: bracket does not straddle Re lambda_2 = 1/2");
  }
  while (high - low > parameter_tol) {
    const double mid = 0.5 * (low + high);
    const double f_mid = excess(mid);
    if ((f_mid < 0.0) == (f_low < 0.0)) {
      low = mid;
      f_low = f_mid;
    } else {
      high = mid;
    }
  }
  result.bracket_low = low;
  result.bracket_high = high;
  result.parameter = 0.5 * (low + high);
  return result;
}

}  // namespace fragtree

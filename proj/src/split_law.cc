#include "fragtree/split_law.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

namespace fragtree {
namespace {

constexpr double kSumTolerance = 1e-12;
constexpr double kLatticeRatioTolerance = 1e-10;
constexpr long kMaxLatticeDenominator = 10000;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Best rational approximation p/q of r with q <= max_den, by continued
// fractions. Returns nullopt unless |r - p/q| <= tol * max(1, |r|).
std::optional<std::pair<long, long>> rational_approximation(double r, double tol, long max_den) {
  long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double x = r;
  for (int iter = 0; iter < 64; ++iter) {
    const double a = std::floor(x);
    if (std::abs(a) > 1e12) break;
    const long ai = static_cast<long>(a);
    const long p2 = ai * p1 + p0;
    const long q2 = ai * q1 + q0;
    if (q2 > max_den) break;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    if (std::abs(r - static_cast<double>(p1) / static_cast<double>(q1)) <=
        tol * std::max(1.0, std::abs(r))) {
      return std::make_pair(p1, q1);
    }
    const double frac = x - a;
    if (frac == 0.0) break;
    x = 1.0 / frac;
  }
  return std::nullopt;
}

// Decides whether positive weights are all integer powers of a common base.
LatticeInfo detect_lattice(const std::vector<double>& weights) {
  LatticeInfo info;
  info.kind = LatticeKind::NonLattice;
  const auto first = std::find_if(weights.begin(), weights.end(), [](double w) { return w > 0.0; });
  if (first == weights.end()) return info;
  const double log_ref = std::log(*first);
  std::vector<long> numerators;
  std::vector<long> denominators;
  for (double w : weights) {
    if (w <= 0.0) {
      numerators.push_back(-1);
      denominators.push_back(1);
      continue;
    }
    auto approx = rational_approximation(std::log(w) / log_ref, kLatticeRatioTolerance,
                                         kMaxLatticeDenominator);
    if (!approx) return info;
    numerators.push_back(approx->first);
    denominators.push_back(approx->second);
  }
  long common = 1;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (weights[j] > 0.0) common = std::lcm(common, denominators[j]);
  }
  std::vector<long> scaled(weights.size(), -1);
  long g = 0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (weights[j] <= 0.0) continue;
    scaled[j] = numerators[j] * (common / denominators[j]);
    g = std::gcd(g, scaled[j]);
  }
  if (g <= 0) return info;
  info.kind = LatticeKind::Lattice;
  // log w_ref = -(common / g) * log R.
  info.base = std::exp(-log_ref * static_cast<double>(g) / static_cast<double>(common));
  for (std::size_t j = 0; j < weights.size(); ++j) {
    info.exponents.push_back(weights[j] > 0.0 ? static_cast<int>(scaled[j] / g) : -1);
  }
  return info;
}

void validate_weights(const std::vector<double>& weights) {
  if (weights.size() < 2) throw LawConfigError("split law needs b >= 2 parts");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0 && w < 1.0)) throw LawConfigError("deterministic weights must lie in [0, 1)");
    sum += w;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw LawConfigError("deterministic weights must sum to 1");
  }
}

// E V^p (1 - V)^q / normaliser for V ~ Beta(a, a').
Complex beta_moment(double a, double a_prime, Complex p, Complex q) {
  return std::exp(log_gamma(a + p) + log_gamma(a_prime + q) - log_gamma(a + a_prime + p + q) -
                  std::lgamma(a) - std::lgamma(a_prime) + std::lgamma(a + a_prime));
}

// E V^s for V the first spacing of m - 1 uniform cut points (Beta(1, m - 1)).
Complex mary_marginal_moment(int m, Complex s) {
  return std::exp(std::lgamma(static_cast<double>(m)) + log_gamma(s + 1.0) -
                  log_gamma(s + static_cast<double>(m)));
}

// E[(U^z + (1-U)^z)(U^w + (1-U)^w)] for U uniform.
Complex binary_cross_moment(Complex z, Complex w) {
  return 2.0 / (1.0 + z + w) + 2.0 * beta_function(z + 1.0, w + 1.0);
}

Complex mary_phi(int m, Complex z) {
  Complex value = 1.0;
  for (int k = 1; k < m; ++k) value *= static_cast<double>(k + 1) / (z + static_cast<double>(k));
  return value;
}

Complex power_or_zero(double v, Complex z) {
  if (v <= 0.0) return 0.0;
  return std::exp(z * std::log(v));
}

void require_no_pole(bool at_pole, const char* what) {
  if (at_pole) throw PoleError(what);
}

bool near_integer_pole(Complex z, int lo, int hi) {
  for (int k = lo; k <= hi; ++k) {
    if (std::abs(z + static_cast<double>(k)) < 1e-14) return true;
  }
  return false;
}

}  // namespace

SplitLaw SplitLaw::binary_uniform() {
  SplitLaw law;
  law.family_ = Family::BinaryUniform;
  law.parts_ = 2;
  law.lattice_.kind = LatticeKind::NonLattice;
  return law;
}

SplitLaw SplitLaw::mary_uniform(int m) {
  if (m < 2) throw LawConfigError("mary: m must be >= 2");
  if (m > 64) throw LawConfigError("mary: m must be <= 64");
  SplitLaw law;
  law.family_ = Family::MaryUniform;
  law.parts_ = m;
  law.order_ = m;
  law.lattice_.kind = LatticeKind::NonLattice;
  return law;
}

SplitLaw SplitLaw::quad_split(int d) {
  if (d < 1) throw LawConfigError("quad: d must be >= 1");
  if (d > 16) throw LawConfigError("quad: d must be <= 16");
  SplitLaw law;
  law.family_ = Family::QuadSplit;
  law.parts_ = 1 << d;
  law.order_ = d;
  law.lattice_.kind = LatticeKind::NonLattice;
  return law;
}

SplitLaw SplitLaw::simplex_split(int d) {
  if (d < 1) throw LawConfigError("simplex: d must be >= 1");
  if (d > 63) throw LawConfigError("simplex: d must be <= 63");
  SplitLaw law;
  law.family_ = Family::SimplexSplit;
  law.parts_ = d + 1;
  law.order_ = d;
  law.lattice_.kind = LatticeKind::NonLattice;
  return law;
}

SplitLaw SplitLaw::beta(double a, double a_prime) {
  if (!(a > 0.0) || !(a_prime > 0.0) || !std::isfinite(a) || !std::isfinite(a_prime)) {
    throw LawConfigError("beta: parameters must be positive and finite");
  }
  SplitLaw law;
  law.family_ = Family::Beta;
  law.parts_ = 2;
  law.a_ = a;
  law.a_prime_ = a_prime;
  law.lattice_.kind = LatticeKind::NonLattice;
  return law;
}

SplitLaw SplitLaw::deterministic(std::vector<double> weights) {
  validate_weights(weights);
  SplitLaw law;
  law.family_ = Family::Deterministic;
  law.parts_ = static_cast<int>(weights.size());
  law.weights_ = std::move(weights);
  law.lattice_ = detect_lattice(law.weights_);
  law.condition_a_ = false;
  law.condition_a_prime_ = false;
  return law;
}

SplitLaw SplitLaw::lattice(double base, std::vector<int> exponents) {
  if (!(base > 1.0)) throw LawConfigError("lattice: base must be > 1");
  if (exponents.size() < 2) throw LawConfigError("lattice: need b >= 2 exponents");
  std::vector<double> weights;
  for (int e : exponents) {
    if (e < 1) throw LawConfigError("lattice: exponents must be >= 1");
    weights.push_back(std::pow(base, -e));
  }
  validate_weights(weights);
  SplitLaw law;
  law.family_ = Family::LatticeDeterministic;
  law.parts_ = static_cast<int>(weights.size());
  law.weights_ = std::move(weights);
  law.lattice_.kind = LatticeKind::Lattice;
  law.lattice_.base = base;
  law.lattice_.exponents = std::move(exponents);
  law.condition_a_ = false;
  law.condition_a_prime_ = false;
  return law;
}

SplitLaw SplitLaw::empirical(std::vector<std::vector<double>> rows, std::string source_path) {
  if (rows.empty()) throw LawConfigError("empirical: no samples");
  const std::size_t b = rows.front().size();
  if (b < 2) throw LawConfigError("empirical: rows need b >= 2 entries");
  auto flat = std::make_shared<std::vector<double>>();
  flat->reserve(rows.size() * b);
  for (const auto& row : rows) {
    if (row.size() != b) throw LawConfigError("empirical: ragged sample rows");
    double sum = 0.0;
    for (double v : row) {
      if (!(v >= 0.0 && v < 1.0)) throw LawConfigError("empirical: entries must lie in [0, 1)");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
      throw LawConfigError("empirical: rows must sum to 1");
    }
    flat->insert(flat->end(), row.begin(), row.end());
  }
  SplitLaw law;
  law.family_ = Family::EmpiricalSamples;
  law.parts_ = static_cast<int>(b);
  law.empirical_ = std::move(flat);
  law.source_path_ = std::move(source_path);
  law.lattice_.kind = LatticeKind::Unknown;
  law.condition_a_ = false;
  law.condition_a_prime_ = false;
  return law;
}

SplitLaw SplitLaw::with_declared_conditions(bool condition_a, bool condition_a_prime) const {
  SplitLaw copy = *this;
  copy.condition_a_ = condition_a;
  copy.condition_a_prime_ = condition_a_prime;
  return copy;
}

bool SplitLaw::is_deterministic() const {
  return family_ == Family::Deterministic || family_ == Family::LatticeDeterministic;
}

bool SplitLaw::has_rational_phi() const {
  switch (family_) {
    case Family::BinaryUniform:
    case Family::MaryUniform:
    case Family::QuadSplit:
    case Family::SimplexSplit:
      return true;
    default:
      return false;
  }
}

bool SplitLaw::all_parts_positive() const {
  switch (family_) {
    case Family::Deterministic:
    case Family::LatticeDeterministic:
      return std::all_of(weights_.begin(), weights_.end(), [](double w) { return w > 0.0; });
    case Family::EmpiricalSamples:
      return std::all_of(empirical_->begin(), empirical_->end(), [](double v) { return v > 0.0; });
    default:
      return true;
  }
}

double SplitLaw::positive_part_count() const {
  switch (family_) {
    case Family::Deterministic:
    case Family::LatticeDeterministic:
      return static_cast<double>(
          std::count_if(weights_.begin(), weights_.end(), [](double w) { return w > 0.0; }));
    case Family::EmpiricalSamples:
      return static_cast<double>(std::count_if(empirical_->begin(), empirical_->end(),
                                               [](double v) { return v > 0.0; })) /
             static_cast<double>(empirical_rows());
    default:
      return static_cast<double>(parts_);
  }
}

std::optional<double> SplitLaw::alpha_closed_form() const {
  switch (family_) {
    case Family::BinaryUniform:
      return 0.5;
    case Family::MaryUniform:
      return harmonic(order_) - 1.0;
    case Family::SimplexSplit:
      return harmonic(order_ + 1) - 1.0;
    case Family::QuadSplit:
      return 0.5 * order_;
    case Family::Beta: {
      // E(-V ln V) = a/(a+a') (psi(a+a'+1) - psi(a+1)) for V ~ Beta(a, a').
      const double s = a_ + a_prime_;
      return a_ / s * (digamma(s + 1.0) - digamma(a_ + 1.0)) +
             a_prime_ / s * (digamma(s + 1.0) - digamma(a_prime_ + 1.0));
    }
    case Family::Deterministic:
    case Family::LatticeDeterministic: {
      double alpha = 0.0;
      for (double w : weights_) {
        if (w > 0.0) alpha -= w * std::log(w);
      }
      return alpha;
    }
    case Family::EmpiricalSamples:
      return std::nullopt;
  }
  return std::nullopt;
}

std::string SplitLaw::spec_string() const {
  std::ostringstream out;
  switch (family_) {
    case Family::BinaryUniform:
      return "binary";
    case Family::MaryUniform:
      return "mary:" + std::to_string(order_);
    case Family::QuadSplit:
      return "quad:" + std::to_string(order_);
    case Family::SimplexSplit:
      return "simplex:" + std::to_string(order_);
    case Family::Beta:
      return "beta:" + format_double(a_) + "," + format_double(a_prime_);
    case Family::Deterministic: {
      out << "det:";
      for (std::size_t j = 0; j < weights_.size(); ++j) {
        out << (j ? "," : "") << format_double(weights_[j]);
      }
      return out.str();
    }
    case Family::LatticeDeterministic: {
      out << "lattice:" << format_double(lattice_.base) << ":";
      for (std::size_t j = 0; j < lattice_.exponents.size(); ++j) {
        out << (j ? "," : "") << lattice_.exponents[j];
      }
      return out.str();
    }
    case Family::EmpiricalSamples:
      return "empirical:" + source_path_;
  }
  return {};
}

std::size_t SplitLaw::empirical_rows() const {
  return empirical_ ? empirical_->size() / static_cast<std::size_t>(parts_) : 0;
}

std::span<const double> SplitLaw::empirical_row(std::size_t i) const {
  const std::size_t b = static_cast<std::size_t>(parts_);
  return std::span<const double>(empirical_->data() + i * b, b);
}

void SplitLaw::sample(Rng& rng, std::span<double> out) const {
  switch (family_) {
    case Family::BinaryUniform: {
      const double u = rng.uniform();
      out[0] = u;
      out[1] = 1.0 - u;
      return;
    }
    case Family::MaryUniform:
    case Family::SimplexSplit: {
      // Spacings of m - 1 uniform cut points are Dirichlet(1, ..., 1).
      double total = 0.0;
      for (int j = 0; j < parts_; ++j) {
        out[j] = rng.exponential();
        total += out[j];
      }
      for (int j = 0; j < parts_; ++j) out[j] /= total;
      return;
    }
    case Family::QuadSplit: {
      out[0] = 1.0;
      std::size_t filled = 1;
      for (int k = 0; k < order_; ++k) {
        const double u = rng.uniform();
        for (std::size_t j = 0; j < filled; ++j) {
          out[filled + j] = out[j] * (1.0 - u);
          out[j] *= u;
        }
        filled *= 2;
      }
      return;
    }
    case Family::Beta: {
      const double x = rng.gamma(a_);
      const double y = rng.gamma(a_prime_);
      double v = x / (x + y);
      if (v >= 1.0) v = std::nextafter(1.0, 0.0);
      out[0] = v;
      out[1] = y / (x + y);
      if (out[1] >= 1.0) out[1] = std::nextafter(1.0, 0.0);
      return;
    }
    case Family::Deterministic:
    case Family::LatticeDeterministic:
      std::copy(weights_.begin(), weights_.end(), out.begin());
      return;
    case Family::EmpiricalSamples: {
      const std::size_t rows = empirical_rows();
      const std::size_t i = static_cast<std::size_t>(rng.uniform() * static_cast<double>(rows));
      const auto row = empirical_row(std::min(i, rows - 1));
      std::copy(row.begin(), row.end(), out.begin());
      return;
    }
  }
}

std::vector<double> SplitLaw::sample(Rng& rng) const {
  std::vector<double> out(static_cast<std::size_t>(parts_));
  sample(rng, out);
  return out;
}

// ---------------------------------------------------------------------------
// Transforms

namespace {

TransformValue empirical_mean(const SplitLaw& law,
                              const std::function<Complex(std::span<const double>)>& statistic) {
  const std::size_t n = law.empirical_rows();
  Complex sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Complex s = statistic(law.empirical_row(i));
    sum += s;
    sum_sq += std::norm(s);
  }
  const double dn = static_cast<double>(n);
  const Complex mean = sum / dn;
  const double var = n > 1 ? std::max(0.0, (sum_sq - dn * std::norm(mean)) / (dn - 1.0)) : 0.0;
  return {mean, 3.0 * std::sqrt(var / dn), TransformMethod::MonteCarlo};
}

Complex power_sum(std::span<const double> v, Complex z) {
  Complex s = 0.0;
  for (double x : v) s += power_or_zero(x, z);
  return s;
}

void require_nonnegative_real_part(Complex z, const char* what) {
  if (z.real() < 0.0) throw TransformDomainError(what);
}

}  // namespace

TransformValue phi(const SplitLaw& law, Complex z) {
  switch (law.family()) {
    case Family::BinaryUniform:
      require_no_pole(std::abs(z + 1.0) < 1e-14, "phi: pole at z = -1");
      return {2.0 / (1.0 + z), 0.0, TransformMethod::ClosedForm};
    case Family::MaryUniform:
    case Family::SimplexSplit: {
      const int m = law.parts();
      require_no_pole(near_integer_pole(z, 1, m - 1), "phi: pole of m-ary closed form");
      return {mary_phi(m, z), 0.0, TransformMethod::ClosedForm};
    }
    case Family::QuadSplit:
      require_no_pole(std::abs(z + 1.0) < 1e-14, "phi: pole at z = -1");
      return {std::pow(2.0 / (1.0 + z), law.order()), 0.0, TransformMethod::ClosedForm};
    case Family::Beta: {
      const double a = law.beta_a();
      const double ap = law.beta_a_prime();
      if (z.real() <= -std::min(a, ap)) {
        throw TransformDomainError("phi: beta closed form needs Re z > -min(a, a')");
      }
      return {beta_moment(a, ap, z, 0.0) + beta_moment(a, ap, 0.0, z), 0.0,
              TransformMethod::ClosedForm};
    }
    case Family::Deterministic:
    case Family::LatticeDeterministic:
      return {power_sum(law.weights(), z), 0.0, TransformMethod::ClosedForm};
    case Family::EmpiricalSamples:
      require_nonnegative_real_part(z, "phi: empirical law needs Re z >= 0");
      return empirical_mean(law, [z](std::span<const double> v) { return power_sum(v, z); });
  }
  return {};
}

TransformValue phi_prime(const SplitLaw& law, Complex z) {
  switch (law.family()) {
    case Family::BinaryUniform:
      require_no_pole(std::abs(z + 1.0) < 1e-14, "phi': pole at z = -1");
      return {-2.0 / ((1.0 + z) * (1.0 + z)), 0.0, TransformMethod::ClosedForm};
    case Family::MaryUniform:
    case Family::SimplexSplit: {
      const int m = law.parts();
      require_no_pole(near_integer_pole(z, 1, m - 1), "phi': pole of m-ary closed form");
      Complex log_derivative = 0.0;
      for (int k = 1; k < m; ++k) log_derivative += 1.0 / (z + static_cast<double>(k));
      return {-mary_phi(m, z) * log_derivative, 0.0, TransformMethod::ClosedForm};
    }
    case Family::QuadSplit: {
      require_no_pole(std::abs(z + 1.0) < 1e-14, "phi': pole at z = -1");
      const double d = law.order();
      return {-d * std::pow(2.0 / (1.0 + z), law.order()) / (1.0 + z), 0.0,
              TransformMethod::ClosedForm};
    }
    case Family::Beta: {
      const double a = law.beta_a();
      const double ap = law.beta_a_prime();
      if (z.real() <= -std::min(a, ap)) {
        throw TransformDomainError("phi': beta closed form needs Re z > -min(a, a')");
      }
      const Complex tail = digamma(z + a + ap);
      return {beta_moment(a, ap, z, 0.0) * (digamma(z + a) - tail) +
                  beta_moment(a, ap, 0.0, z) * (digamma(z + ap) - tail),
              0.0, TransformMethod::ClosedForm};
    }
    case Family::Deterministic:
    case Family::LatticeDeterministic: {
      Complex s = 0.0;
      for (double w : law.weights()) {
        if (w > 0.0) s += std::log(w) * std::exp(z * std::log(w));
      }
      return {s, 0.0, TransformMethod::ClosedForm};
    }
    case Family::EmpiricalSamples:
      return finite_difference_derivative([&law](Complex s) { return phi(law, s); }, z);
  }
  return {};
}

TransformValue psi(const SplitLaw& law, Complex z, Complex w) {
  switch (law.family()) {
    case Family::BinaryUniform: {
      const Complex cross = binary_cross_moment(z, w);
      return {cross - 4.0 / ((1.0 + z) * (1.0 + w)), 0.0, TransformMethod::ClosedForm};
    }
    case Family::MaryUniform:
    case Family::SimplexSplit: {
      const int m = law.parts();
      const double md = m;
      const Complex diagonal = md * mary_marginal_moment(m, z + w);
      const Complex off_diagonal =
          md * (md - 1.0) *
          std::exp(std::lgamma(md) + log_gamma(z + 1.0) + log_gamma(w + 1.0) - log_gamma(z + w + md));
      return {diagonal + off_diagonal - mary_phi(m, z) * mary_phi(m, w), 0.0,
              TransformMethod::ClosedForm};
    }
    case Family::QuadSplit: {
      const int d = law.order();
      const Complex cross = std::pow(binary_cross_moment(z, w), d);
      const Complex phis = std::pow(4.0 / ((1.0 + z) * (1.0 + w)), d);
      return {cross - phis, 0.0, TransformMethod::ClosedForm};
    }
    case Family::Beta: {
      const double a = law.beta_a();
      const double ap = law.beta_a_prime();
      const Complex s = z + w;
      const Complex second = beta_moment(a, ap, s, 0.0) + beta_moment(a, ap, 0.0, s) +
                             beta_moment(a, ap, z, w) + beta_moment(a, ap, w, z);
      return {second - phi(law, z).value * phi(law, w).value, 0.0, TransformMethod::ClosedForm};
    }
    case Family::Deterministic:
    case Family::LatticeDeterministic:
      return {0.0, 0.0, TransformMethod::ClosedForm};
    case Family::EmpiricalSamples: {
      require_nonnegative_real_part(z, "psi: empirical law needs Re z >= 0");
      require_nonnegative_real_part(w, "psi: empirical law needs Re w >= 0");
      const TransformValue fz = phi(law, z);
      const TransformValue fw = phi(law, w);
      const TransformValue second = empirical_mean(
          law, [z, w](std::span<const double> v) { return power_sum(v, z) * power_sum(v, w); });
      const double bound = second.error_bound + std::abs(fz.value) * fw.error_bound +
                           std::abs(fw.value) * fz.error_bound;
      return {second.value - fz.value * fw.value, bound, TransformMethod::MonteCarlo};
    }
  }
  return {};
}

TransformValue monte_carlo_phi(const SplitLaw& law, Complex z, std::size_t n, Rng& rng) {
  std::vector<double> v(static_cast<std::size_t>(law.parts()));
  Complex sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    law.sample(rng, v);
    const Complex s = power_sum(v, z);
    sum += s;
    sum_sq += std::norm(s);
  }
  const double dn = static_cast<double>(n);
  const Complex mean = sum / dn;
  const double var = std::max(0.0, (sum_sq - dn * std::norm(mean)) / std::max(1.0, dn - 1.0));
  return {mean, 3.0 * std::sqrt(var / dn), TransformMethod::MonteCarlo};
}

TransformValue monte_carlo_psi(const SplitLaw& law, Complex z, Complex w, std::size_t n, Rng& rng) {
  std::vector<double> v(static_cast<std::size_t>(law.parts()));
  std::vector<Complex> sz(n), sw(n);
  Complex mean_z = 0.0, mean_w = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    law.sample(rng, v);
    sz[i] = power_sum(v, z);
    sw[i] = power_sum(v, w);
    mean_z += sz[i];
    mean_w += sw[i];
  }
  const double dn = static_cast<double>(n);
  mean_z /= dn;
  mean_w /= dn;
  Complex cov = 0.0;
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Complex term = (sz[i] - mean_z) * (sw[i] - mean_w);
    cov += term;
    sq += std::norm(term);
  }
  cov /= std::max(1.0, dn - 1.0);
  const double var = std::max(0.0, sq / dn - std::norm(cov));
  return {cov, 3.0 * std::sqrt(var / dn), TransformMethod::MonteCarlo};
}

TransformValue finite_difference_derivative(const std::function<TransformValue(Complex)>& f,
                                            Complex z, double step) {
  const TransformValue fp1 = f(z + step);
  const TransformValue fm1 = f(z - step);
  const TransformValue fp2 = f(z + 2.0 * step);
  const TransformValue fm2 = f(z - 2.0 * step);
  const Complex d1 = (fp1.value - fm1.value) / (2.0 * step);
  const Complex d2 = (fp2.value - fm2.value) / (4.0 * step);
  const Complex richardson = (4.0 * d1 - d2) / 3.0;
  // Propagated function error: the Richardson weights sum to (4/3)/(2h) + (1/3)/(4h).
  const double propagated =
      (4.0 / 3.0) * (fp1.error_bound + fm1.error_bound) / (2.0 * step) +
      (1.0 / 3.0) * (fp2.error_bound + fm2.error_bound) / (4.0 * step);
  const double roundoff = 8.0 * std::numeric_limits<double>::epsilon() *
                          std::max({std::abs(fp1.value), std::abs(fm1.value), 1.0}) / step;
  return {richardson, std::abs(d1 - d2) + propagated + roundoff, TransformMethod::FiniteDifference};
}

ConditionBReport check_condition_b(const SplitLaw& law, double delta, double t_max, double grid,
                                   double t_min) {
  if (!(grid > 0.0)) throw std::invalid_argument("check_condition_b: grid step must be positive");
  if (t_min < 0.0) t_min = grid;
  ConditionBReport report;
  report.delta = delta;
  report.t_min = t_min;
  report.t_max = t_max;
  double best = -1.0;
  double best_gap = 0.0;
  const auto steps = static_cast<long>(std::floor((t_max - t_min) / grid + 1e-9));
  for (long k = 0; k <= steps; ++k) {
    const double t = t_min + static_cast<double>(k) * grid;
    const Complex value = phi(law, Complex(delta, t)).value;
    const double modulus = std::abs(value);
    const double gap = std::abs(value - 1.0);
    if (modulus > best + 1e-12 || (modulus >= best - 1e-12 && gap < best_gap)) {
      best = std::max(best, modulus);
      best_gap = gap;
      report.attained_at = t;
    }
  }
  report.sup_estimate = best;
  return report;
}

}  // namespace fragtree

#include "reiterhom/nfunc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

// pchip.hpp calls isnan unqualified and relies on this header for it.
#include <boost/math/special_functions/fpclassify.hpp>
#include <boost/math/interpolators/pchip.hpp>
#include <fmt/format.h>

#include "reiterhom/error.hpp"

namespace reiterhom::nfunc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kBisectionSteps = 80;

// Solves f(t) = target for nondecreasing f with f(0) <= target. The upper
// bracket is found by doubling and never exceeds `limit`.
template <class F>
double bisect_nondecreasing(F&& f, double target, double limit) {
  double lo = 0.0;
  double hi = std::min(1.0, limit);
  while (f(hi) < target) {
    if (hi >= limit) {
      throw Error(Errc::range, fmt::format("value {} exceeds the tabulated range", target));
    }
    lo = hi;
    hi = std::min(2.0 * hi, limit);
  }
  for (int i = 0; i < kBisectionSteps; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

void require_nonnegative(double t) {
  if (!(t >= 0.0)) {
    throw Error(Errc::domain, fmt::format("N-function argument must be >= 0, got {}", t));
  }
}

}  // namespace

struct NFunction::Impl {
  virtual ~Impl() = default;
  virtual Kind kind() const = 0;
  virtual double value(double t) const = 0;
  virtual double density(double t) const = 0;
  virtual std::string describe() const = 0;
  virtual double exponent() const { return kNaN; }
  virtual double scale() const { return kNaN; }
  virtual double upper() const { return kInf; }

  virtual double density_inverse(double s) const {
    if (s <= density(0.0)) return 0.0;
    return bisect_nondecreasing([this](double t) { return density(t); }, s, upper());
  }

  virtual double inverse(double v) const {
    if (v <= 0.0) return 0.0;
    return bisect_nondecreasing([this](double t) { return value(t); }, v, upper());
  }
};

namespace {

class PowerImpl final : public NFunction::Impl {
 public:
  PowerImpl(double p, double c) : p_(p), c_(c) {}
  Kind kind() const override { return Kind::power; }
  double value(double t) const override { return c_ * std::pow(t, p_); }
  double density(double t) const override { return c_ * p_ * std::pow(t, p_ - 1.0); }
  double density_inverse(double s) const override {
    return s <= 0.0 ? 0.0 : std::pow(s / (c_ * p_), 1.0 / (p_ - 1.0));
  }
  double inverse(double v) const override { return v <= 0.0 ? 0.0 : std::pow(v / c_, 1.0 / p_); }
  double exponent() const override { return p_; }
  double scale() const override { return c_; }
  std::string describe() const override { return fmt::format("power(p={:g}, scale={:g})", p_, c_); }

 private:
  double p_;
  double c_;
};

class PowerLogImpl final : public NFunction::Impl {
 public:
  explicit PowerLogImpl(double p) : p_(p) {}
  Kind kind() const override { return Kind::power_log; }
  double value(double t) const override { return std::pow(t, p_) * std::log1p(t); }
  double density(double t) const override {
    if (t == 0.0) return 0.0;
    return p_ * std::pow(t, p_ - 1.0) * std::log1p(t) + std::pow(t, p_) / (1.0 + t);
  }
  double exponent() const override { return p_; }
  std::string describe() const override { return fmt::format("power_log(p={:g})", p_); }

 private:
  double p_;
};

class ExpImpl final : public NFunction::Impl {
 public:
  Kind kind() const override { return Kind::exp_minus_one; }
  double value(double t) const override { return std::expm1(t); }
  double density(double t) const override { return std::exp(t); }
  double density_inverse(double s) const override { return s <= 1.0 ? 0.0 : std::log(s); }
  double inverse(double v) const override { return v <= 0.0 ? 0.0 : std::log1p(v); }
  std::string describe() const override { return "exp_minus_one"; }
};

class TabulatedImpl final : public NFunction::Impl {
 public:
  TabulatedImpl(std::vector<double> t, std::vector<double> phi)
      : knots_(t), spline_(std::move(t), std::move(phi)) {
    cumulative_.assign(knots_.size(), 0.0);
    for (std::size_t i = 1; i < knots_.size(); ++i) {
      cumulative_[i] = cumulative_[i - 1] + segment_integral(knots_[i - 1], knots_[i]);
    }
  }

  Kind kind() const override { return Kind::tabulated; }
  double upper() const override { return knots_.back(); }

  double value(double t) const override {
    check_range(t);
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    const auto i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - knots_.begin()) - 1));
    return cumulative_[i] + segment_integral(knots_[i], t);
  }

  double density(double t) const override {
    check_range(t);
    return std::max(0.0, spline_(t));
  }

  std::string describe() const override {
    return fmt::format("tabulated({} knots on [0, {:g}])", knots_.size(), knots_.back());
  }

 private:
  // Two-point Gauss-Legendre is exact on one cubic Hermite piece.
  double segment_integral(double a, double b) const {
    if (b <= a) return 0.0;
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double off = half / std::sqrt(3.0);
    return half * (spline_(mid - off) + spline_(mid + off));
  }

  void check_range(double t) const {
    if (t > knots_.back() * (1.0 + 1e-14)) {
      throw Error(Errc::range,
                  fmt::format("argument {} outside tabulated range [0, {}]", t, knots_.back()));
    }
  }

  std::vector<double> knots_;
  boost::math::interpolators::pchip<std::vector<double>> spline_;
  std::vector<double> cumulative_;
};

// Phi~(s) = s phi^{-1}(s) - Phi(phi^{-1}(s)), with density phi^{-1}.
class ConjugateImpl final : public NFunction::Impl {
 public:
  explicit ConjugateImpl(NFunction primal) : primal_(std::move(primal)) {}
  Kind kind() const override { return Kind::conjugate; }

  double value(double s) const override {
    if (s <= 0.0) return 0.0;
    const double t = primal_.density_inverse(s);
    return std::max(0.0, s * t - primal_(t));
  }
  double density(double s) const override { return primal_.density_inverse(s); }
  double density_inverse(double t) const override { return primal_.density(t); }

  // Phi~(phi(t)) = t phi(t) - Phi(t) is nondecreasing in t, so solve in t.
  double inverse(double v) const override {
    if (v <= 0.0) return 0.0;
    const double t = bisect_nondecreasing(
        [this](double x) { return x * primal_.density(x) - primal_(x); }, v, primal_.upper_limit());
    return primal_.density(t);
  }

  double upper() const override {
    const double u = primal_.upper_limit();
    return std::isfinite(u) ? primal_.density(u) : kInf;
  }

  std::string describe() const override { return "conjugate(" + primal_.describe() + ")"; }

  const NFunction& primal() const { return primal_; }

 private:
  NFunction primal_;
};

}  // namespace

std::string_view to_string(Kind kind) noexcept {
  switch (kind) {
    case Kind::power: return "power";
    case Kind::power_log: return "power_log";
    case Kind::exp_minus_one: return "exp_minus_one";
    case Kind::tabulated: return "tabulated";
    case Kind::conjugate: return "conjugate";
  }
  return "unknown";
}

NFunction::NFunction(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

NFunction NFunction::power(double p) { return power(p, 1.0 / p); }

NFunction NFunction::power(double p, double scale) {
  if (!(p > 1.0) || !std::isfinite(p)) {
    throw Error(Errc::domain, fmt::format("power N-function needs p > 1, got {}", p));
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(Errc::domain, fmt::format("power N-function needs scale > 0, got {}", scale));
  }
  return NFunction(std::make_shared<PowerImpl>(p, scale));
}

NFunction NFunction::power_log(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw Error(Errc::domain, fmt::format("power_log N-function needs p >= 1, got {}", p));
  }
  return NFunction(std::make_shared<PowerLogImpl>(p));
}

NFunction NFunction::exp_minus_one() { return NFunction(std::make_shared<ExpImpl>()); }

NFunction NFunction::tabulated(std::vector<double> t, std::vector<double> phi) {
  if (t.size() != phi.size()) {
    throw Error(Errc::shape, "tabulated N-function: knot and density arrays differ in length");
  }
  if (t.size() < 4) {
    throw Error(Errc::domain, "tabulated N-function needs at least four knots");
  }
  if (t.front() != 0.0 || phi.front() != 0.0) {
    throw Error(Errc::domain, "tabulated N-function must start at t = 0 with phi(0) = 0");
  }
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) throw Error(Errc::domain, "tabulated knots must be strictly increasing");
    if (!(phi[i] >= phi[i - 1])) throw Error(Errc::domain, "tabulated density must be nondecreasing");
    if (!(phi[i] > 0.0)) throw Error(Errc::domain, "tabulated density must be positive for t > 0");
  }
  return NFunction(std::make_shared<TabulatedImpl>(std::move(t), std::move(phi)));
}

Kind NFunction::kind() const noexcept { return impl_->kind(); }
double NFunction::exponent() const noexcept { return impl_->exponent(); }
double NFunction::scale() const noexcept { return impl_->scale(); }
double NFunction::upper_limit() const noexcept { return impl_->upper(); }

double NFunction::operator()(double t) const {
  require_nonnegative(t);
  return impl_->value(t);
}

double NFunction::density(double t) const {
  require_nonnegative(t);
  return impl_->density(t);
}

double NFunction::density_inverse(double s) const {
  require_nonnegative(s);
  return impl_->density_inverse(s);
}

double NFunction::inverse(double value) const {
  require_nonnegative(value);
  return impl_->inverse(value);
}

std::string NFunction::describe() const { return impl_->describe(); }

double evaluate(const NFunction& nf, double t) { return nf(t); }

NFunction complementary(const NFunction& nf) {
  switch (nf.kind()) {
    case Kind::power: {
      const double p = nf.exponent();
      const double q = p / (p - 1.0);
      const double c = nf.scale();
      return NFunction::power(q, std::pow(c * p, 1.0 - q) / q);
    }
    case Kind::conjugate:
      return static_cast<const ConjugateImpl&>(*nf.impl_).primal();
    default:
      return NFunction(std::make_shared<ConjugateImpl>(nf));
  }
}

double complementary_inverse(const NFunction& nf, double value) {
  return complementary(nf).inverse(value);
}

double coercivity_constant(const NFunction& nf, double h_min) {
  if (!(h_min > 0.0 && h_min < 1.0)) {
    throw Error(Errc::domain, fmt::format("coercivity constant needs 0 < h_min < 1, got {}", h_min));
  }
  return complementary_inverse(nf, nf(h_min));
}

std::vector<double> dyadic_grid(double lo, double hi, std::size_t points) {
  if (!(lo > 0.0) || !(hi > lo) || points < 2) {
    throw Error(Errc::domain, "dyadic_grid needs 0 < lo < hi and at least two points");
  }
  std::vector<double> grid(points);
  const double step = std::log(hi / lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = lo * std::exp(step * static_cast<double>(i));
  }
  grid.back() = hi;
  return grid;
}

std::vector<double> default_grid() { return dyadic_grid(1e-3, 1e3, 200); }

namespace {

void require_grid(std::span<const double> grid) {
  if (grid.empty()) throw Error(Errc::domain, "growth grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) {
      throw Error(Errc::domain, fmt::format("growth grid entry {} is not positive", grid[i]));
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw Error(Errc::domain, "growth grid must be strictly increasing");
    }
  }
}

double safe_ratio(double num, double den) {
  if (!std::isfinite(num) || !std::isfinite(den) || den <= 0.0) return kInf;
  return num / den;
}

// Given suffix maxima of the violation ratio, returns the smallest constant of
// kGrowthConstants admitting a threshold index <= last_t0, and that index.
bool find_witness(const std::vector<double>& suffix_max, std::size_t last_t0, double& constant,
                  std::size_t& t0_index) {
  for (double k : kGrowthConstants) {
    for (std::size_t i = 0; i <= last_t0; ++i) {
      if (suffix_max[i] <= k) {
        constant = k;
        t0_index = i;
        return true;
      }
    }
  }
  return false;
}

}  // namespace

GrowthReport growth_report(const NFunction& nf, std::span<const double> grid) {
  require_grid(grid);
  const std::size_t n = grid.size();
  const double midpoint = std::sqrt(grid.front() * grid.back());
  std::size_t last_t0 = 0;
  while (last_t0 + 1 < n && grid[last_t0 + 1] <= midpoint * (1.0 + 1e-12)) ++last_t0;

  auto safe_value = [&](double t) {
    try {
      return nf(t);
    } catch (const Error&) {
      return kInf;
    }
  };

  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = safe_value(grid[i]);

  GrowthReport report;
  report.simonenko_lo = kInf;
  report.simonenko_hi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double index = kNaN;
    try {
      index = grid[i] * nf.density(grid[i]) / values[i];
    } catch (const Error&) {
    }
    if (!std::isfinite(index)) continue;
    report.simonenko_lo = std::min(report.simonenko_lo, index);
    report.simonenko_hi = std::max(report.simonenko_hi, index);
  }

  std::vector<double> doubling(n);
  for (std::size_t i = 0; i < n; ++i) doubling[i] = safe_ratio(safe_value(2.0 * grid[i]), values[i]);
  std::vector<double> suffix(n);
  suffix[n - 1] = doubling[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) suffix[i] = std::max(suffix[i + 1], doubling[i]);
  std::size_t t0_index = 0;
  report.delta2 = find_witness(suffix, last_t0, report.delta2_k, t0_index);
  if (report.delta2) report.delta2_t0 = grid[t0_index];

  std::vector<double> row_max(n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) {
      const double r = safe_ratio(safe_value(grid[a] * grid[b]), values[a] * values[b]);
      row_max[a] = std::max(row_max[a], r);
    }
  }
  suffix[n - 1] = row_max[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) suffix[i] = std::max(suffix[i + 1], row_max[i]);
  report.delta_prime = find_witness(suffix, last_t0, report.delta_prime_beta, t0_index);
  if (report.delta_prime) report.delta_prime_t0 = grid[t0_index];

  return report;
}

PropertyCheck check_properties(const NFunction& nf, std::span<const double> grid) {
  require_grid(grid);
  const NFunction conj = complementary(nf);
  PropertyCheck check;
  check.min_index = kInf;
  check.max_young_excess = -kInf;
  check.max_doubling_excess = -kInf;
  for (double t : grid) {
    const double big = nf(t);
    const double dens = nf.density(t);
    const double tphi = t * dens;
    const double index = tphi / big;
    const double young = (conj(dens) - tphi) / std::max(tphi, 1e-300);
    const double doubling = (tphi - nf(2.0 * t)) / std::max(tphi, 1e-300);
    if (index < check.min_index) {
      check.min_index = index;
      check.worst_t = t;
    }
    check.max_young_excess = std::max(check.max_young_excess, young);
    check.max_doubling_excess = std::max(check.max_doubling_excess, doubling);
  }
  check.holds = check.min_index >= 1.0 - 1e-10 && check.max_young_excess <= 1e-10 &&
                check.max_doubling_excess <= 1e-10;
  return check;
}

std::vector<std::string> check_invariants(const NFunction& nf, std::span<const double> grid) {
  require_grid(grid);
  std::vector<std::string> issues;
  if (std::abs(nf.density(0.0)) > 1e-14) {
    issues.push_back(fmt::format("phi(0) = {} is not zero", nf.density(0.0)));
  }
  double prev_density = nf.density(0.0);
  double prev_value = 0.0;
  double prev_t = 0.0;
  double prev_slope = 0.0;
  for (double t : grid) {
    const double d = nf.density(t);
    const double v = nf(t);
    if (!(d > 0.0)) issues.push_back(fmt::format("phi({}) = {} is not positive", t, d));
    if (d < prev_density * (1.0 - 1e-12)) issues.push_back(fmt::format("phi decreases at t = {}", t));
    const double slope = (v - prev_value) / (t - prev_t);
    if (slope < prev_slope * (1.0 - 1e-9) - 1e-300) {
      issues.push_back(fmt::format("Phi is not convex near t = {}", t));
    }
    prev_density = d;
    prev_value = v;
    prev_t = t;
    prev_slope = slope;
  }
  const double first = nf(grid.front()) / grid.front();
  const double last = nf(grid.back()) / grid.back();
  if (!(last > first)) {
    issues.push_back("Phi(t)/t does not increase between the grid endpoints");
  }
  return issues;
}

}  // namespace reiterhom::nfunc

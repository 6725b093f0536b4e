#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <boost/random/sobol.hpp>
#include <fmt/format.h>

#include "reiterhom/coeff.hpp"
#include "reiterhom/error.hpp"

namespace reiterhom::coeff {

namespace {

struct Sample {
  Vec y{0.0, 0.0};
  Vec z{0.0, 0.0};
  double zeta = 0.0;
  Vec lambda{0.0, 0.0};
  double zeta2 = 0.0;
  Vec lambda2{0.0, 0.0};
};

// Tracks the worst margin of one hypothesis.
struct Tracker {
  HypothesisResult result;
  bool seen = false;
  bool worst_ok = true;

  explicit Tracker(std::string name) { result.name = std::move(name); }

  // Keeps the sample minimizing (ok, margin) lexicographically, so a failing
  // sample always wins the witness slot.
  void record(double margin, bool ok, const Sample& s, int dim) {
    const bool worse = !seen || (!ok && worst_ok) || (ok == worst_ok && margin < result.margin);
    if (!ok) result.pass = false;
    if (!worse) return;
    seen = true;
    worst_ok = ok;
    result.margin = margin;
    result.witness.clear();
    for (int i = 0; i < dim; ++i) result.witness.push_back(s.y[i]);
    for (int i = 0; i < dim; ++i) result.witness.push_back(s.z[i]);
    result.witness.push_back(s.zeta);
    for (int i = 0; i < dim; ++i) result.witness.push_back(s.lambda[i]);
    result.witness.push_back(s.zeta2);
    for (int i = 0; i < dim; ++i) result.witness.push_back(s.lambda2[i]);
  }

  HypothesisResult finish() {
    if (!seen) {
      result.margin = std::numeric_limits<double>::infinity();
    } else if (result.pass) {
      result.pass = result.margin > 0.0;
    }
    if (result.pass) result.witness.clear();
    return result;
  }
};

double norm(const Vec& v, int dim) { return dim == 1 ? std::abs(v[0]) : std::hypot(v[0], v[1]); }

double dot(const Vec& a, const Vec& b, int dim) { return dim == 1 ? a[0] * b[0] : a[0] * b[0] + a[1] * b[1]; }

Vec sub(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1]}; }

bool finite(const Vec& v) { return std::isfinite(v[0]) && std::isfinite(v[1]); }

// Scrambled Sobol points: each coordinate shifted by a seeded uniform, mod 1.
class Sampler {
 public:
  Sampler(std::size_t dims, std::uint64_t seed) : engine_(static_cast<unsigned>(dims)), shift_(dims), point_(dims) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& s : shift_) s = u(rng);
    engine_.discard(dims);  // skip the origin
  }

  const std::vector<double>& next() {
    constexpr double scale = 1.0 / 18446744073709551616.0;  // 2^-64
    for (std::size_t k = 0; k < point_.size(); ++k) {
      const double v = static_cast<double>(engine_()) * scale + shift_[k];
      point_[k] = v - std::floor(v);
    }
    return point_;
  }

 private:
  boost::random::sobol engine_;
  std::vector<double> shift_;
  std::vector<double> point_;
};

}  // namespace

HypothesisReport validate(const Coefficient& c, std::size_t samples, std::uint64_t seed) {
  HypothesisReport report;
  report.problem = c.name;
  report.samples = samples;
  report.seed = seed;
  const int d = c.dim;
  const double R = kSampleBound;
  const nfunc::NFunction phi_tilde = nfunc::complementary(c.phi);
  const nfunc::NFunction psi_tilde = nfunc::complementary(c.psi);
  const Constants& k = c.constants;

  auto eval = [&](const Vec& y, const Vec& z, double zeta, const Vec& lambda) {
    return c.flux(std::span<const double>(y.data(), d), std::span<const double>(z.data(), d), zeta,
                  std::span<const double>(lambda.data(), d))
        .a;
  };

  // H2: index chain and constants (no sampling).
  {
    HypothesisResult r{"H2", true, 0.0, "", {}};
    const auto grid = nfunc::default_grid();
    const auto gphi = nfunc::growth_report(c.phi, grid);
    const auto gpsi = nfunc::growth_report(c.psi, grid);
    const bool chain = gpsi.simonenko_lo > 1.0 && gpsi.simonenko_hi <= gphi.simonenko_lo * (1.0 + 1e-12);
    const bool consts = k.c1 > 0.5 && k.c3 > 0.5 && k.c2 > 0.0 && k.c4 > 0.0;
    r.pass = chain && consts;
    r.margin = std::min({gpsi.simonenko_lo - 1.0, k.c1 - 0.5, k.c3 - 0.5, k.c2, k.c4});
    r.detail = fmt::format("rho0={:.6g} rho1 in [{:.6g}, {:.6g}] rho2={:.6g} chain_slack={:.3g}", gpsi.simonenko_lo,
                           gpsi.simonenko_hi, gphi.simonenko_lo, gphi.simonenko_hi,
                           gphi.simonenko_lo - gpsi.simonenko_hi);
    report.results.push_back(r);
  }

  // H3: shape of h on [0, 1e3].
  HypothesisResult h3{"H3", true, std::numeric_limits<double>::infinity(), "", {}};
  {
    std::vector<double> ts{0.0};
    for (double t : nfunc::default_grid()) ts.push_back(t);
    double prev = c.h(0.0);
    double lowest = prev;
    bool shape = true;
    for (double t : ts) {
      const double v = c.h(t);
      if (!(v > 0.0 && v < 1.0) || v > prev + 1e-15) shape = false;
      lowest = std::min(lowest, v);
      prev = v;
    }
    if (!(c.h_min > 0.0) || c.h_min > lowest * (1.0 + 1e-12)) shape = false;
    h3.pass = shape;
    h3.detail = fmt::format("min h on grid {:.6g}, declared {:.6g}", lowest, c.h_min);
  }

  const std::size_t dims = 2 * static_cast<std::size_t>(d) + 2 * (1 + static_cast<std::size_t>(d)) + 1;
  Sampler sampler(dims, seed);
  Tracker t1("H1"), t13("H2.bound"), t14("H3"), t4("H4"), t5("H5"), t6("H6");
  double zero_sup = 0.0;
  for (std::size_t n = 0; n < samples; ++n) {
    const auto& u = sampler.next();
    Sample s;
    std::size_t q = 0;
    for (int i = 0; i < d; ++i) s.y[i] = c.cell_length_y * u[q++];
    for (int i = 0; i < d; ++i) s.z[i] = c.cell_length_z * u[q++];
    s.zeta = R * (2.0 * u[q++] - 1.0);
    for (int i = 0; i < d; ++i) s.lambda[i] = R * (2.0 * u[q++] - 1.0);
    s.zeta2 = R * (2.0 * u[q++] - 1.0);
    for (int i = 0; i < d; ++i) s.lambda2[i] = R * (2.0 * u[q++] - 1.0);
    // Every other sample probes a nearby pair at a scale between 1e-4 and 1.
    if (n % 2 == 1) {
      const double delta = std::pow(10.0, -4.0 * u[q]);
      s.zeta2 = s.zeta + delta * (s.zeta2 / R);
      for (int i = 0; i < d; ++i) s.lambda2[i] = s.lambda[i] + delta * (s.lambda2[i] / R);
    }

    const Vec a = eval(s.y, s.z, s.zeta, s.lambda);
    const Vec a0 = eval(s.y, s.z, 0.0, Vec{0.0, 0.0});
    const bool ok1 = finite(a) && finite(a0);
    zero_sup = std::max(zero_sup, norm(a0, d));
    t1.record(ok1 ? 1.0 : -1.0, ok1, s, d);
    if (!ok1) continue;

    // (1.3) growth bound between (zeta, lambda) and (zeta', lambda').
    const Vec b = eval(s.y, s.z, s.zeta2, s.lambda2);
    const double dz = std::abs(s.zeta - s.zeta2);
    const double dl = norm(sub(s.lambda, s.lambda2), d);
    if (dz > 0.0 || dl > 0.0) {
      const double lhs = norm(sub(a, b), d);
      const double rhs =
          k.c1 * psi_tilde.inverse(c.phi(k.c2 * dz)) + k.c3 * phi_tilde.inverse(c.phi(k.c4 * dl));
      const double margin = rhs > 0.0 ? (rhs - lhs) / rhs : (lhs == 0.0 ? 0.0 : -1.0);
      t13.record(margin, lhs <= rhs * (1.0 + 1e-12), s, d);
    }

    // (1.4) degenerate coercivity.
    const double nl = norm(s.lambda, d);
    if (nl > 0.0) {
      const double lower = c.theta(s.zeta) * c.phi(nl);
      const double lhs = dot(a, s.lambda, d);
      const double margin = (lhs - lower) / lower;
      t14.record(margin, lhs >= lower * (1.0 - 1e-12), s, d);
    }

    // H4 / H6 at a common zeta.
    if (dl > 0.0) {
      const Vec a2 = eval(s.y, s.z, s.zeta, s.lambda2);
      const Vec da = sub(a, a2);
      const Vec dlam = sub(s.lambda, s.lambda2);
      const double pos = dot(da, dlam, d);
      const double scale = norm(da, d) * dl;
      t4.record(scale > 0.0 ? pos / scale : -1.0, pos > 0.0, s, d);
      const double lower = k.c5 * c.phi(dl);
      t6.record(pos > 0.0 ? (pos - lower) / pos : -1.0, pos > lower, s, d);
    }

    // H5: translations of y within rho.
    double worst = 0.0;
    for (int axis = 0; axis < d; ++axis) {
      for (double f : {-1.0, -0.5, 0.5, 1.0}) {
        Vec y = s.y;
        y[axis] -= f * c.rho;
        worst = std::max(worst, norm(sub(eval(y, s.z, s.zeta, s.lambda), a), d));
      }
    }
    t5.record((c.eta - worst) / c.eta, worst <= c.eta, s, d);
  }

  HypothesisResult r1 = t1.finish();
  r1.detail = fmt::format("sup |a(y,z,0,0)| = {:.6g}", zero_sup);
  if (r1.pass) r1.margin = 1.0 / (1.0 + zero_sup);
  report.results.insert(report.results.begin(), r1);
  report.results.push_back(t13.finish());
  HypothesisResult r14 = t14.finish();
  r14.pass = r14.pass && h3.pass;
  r14.detail = h3.detail;
  report.results.push_back(r14);
  report.results.push_back(t4.finish());
  HypothesisResult r5 = t5.finish();
  r5.detail = fmt::format("eta={} rho={}", c.eta, c.rho);
  report.results.push_back(r5);
  HypothesisResult r6 = t6.finish();
  r6.detail = fmt::format("c5={}", k.c5);
  report.results.push_back(r6);
  return report;
}

}  // namespace reiterhom::coeff

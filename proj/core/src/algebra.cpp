#include "reiterhom/algebra.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "reiterhom/error.hpp"

namespace reiterhom::meanvalue {

namespace {

double dot(const std::array<double, 2>& w, std::span<const double> y) noexcept {
  double s = w[0] * y[0];
  if (y.size() > 1) s += w[1] * y[1];
  return s;
}

bool is_zero(const std::array<double, 2>& w) noexcept {
  return std::hypot(w[0], w[1]) <= kFrequencyTolerance;
}

// Canonical representative of +-omega: first nonzero component positive.
TrigTerm canonical(TrigTerm t) noexcept {
  const bool flip = t.omega[0] < -kFrequencyTolerance ||
                    (std::abs(t.omega[0]) <= kFrequencyTolerance && t.omega[1] < -kFrequencyTolerance);
  if (flip) {
    t.omega = {-t.omega[0], -t.omega[1]};
    t.sin_coef = -t.sin_coef;
  }
  if (is_zero(t.omega)) {
    t.omega = {0.0, 0.0};
    t.sin_coef = 0.0;
  }
  return t;
}

std::vector<TrigTerm> merge(const std::vector<TrigTerm>& raw) {
  std::vector<TrigTerm> out;
  for (const TrigTerm& r : raw) {
    const TrigTerm t = canonical(r);
    bool merged = false;
    for (TrigTerm& o : out) {
      if (std::hypot(o.omega[0] - t.omega[0], o.omega[1] - t.omega[1]) <= kFrequencyTolerance) {
        o.cos_coef += t.cos_coef;
        o.sin_coef += t.sin_coef;
        merged = true;
        break;
      }
    }
    if (!merged) out.push_back(t);
  }
  return out;
}

bool is_constant_base(const AlgebraRep::Base& base) {
  const auto* poly = std::get_if<TrigPoly>(&base);
  return poly != nullptr && poly->is_constant();
}

double evaluate_base(const AlgebraRep::Base& base, std::span<const double> y) {
  return std::visit([&](const auto& b) { return b(y); }, base);
}

}  // namespace

TrigPoly::TrigPoly(std::vector<TrigTerm> terms) : terms_(merge(terms)) {}

TrigPoly TrigPoly::constant(double c) { return TrigPoly({TrigTerm{{0.0, 0.0}, c, 0.0}}); }

double TrigPoly::operator()(std::span<const double> y) const noexcept {
  double s = 0.0;
  for (const TrigTerm& t : terms_) {
    const double arg = dot(t.omega, y);
    s += t.cos_coef * std::cos(arg) + t.sin_coef * std::sin(arg);
  }
  return s;
}

double TrigPoly::zero_mode() const noexcept {
  double s = 0.0;
  for (const TrigTerm& t : terms_) {
    if (is_zero(t.omega)) s += t.cos_coef;
  }
  return s;
}

bool TrigPoly::is_constant() const noexcept {
  for (const TrigTerm& t : terms_) {
    if (!is_zero(t.omega) && (t.cos_coef != 0.0 || t.sin_coef != 0.0)) return false;
  }
  return true;
}

TrigPoly TrigPoly::product(const TrigPoly& other) const {
  std::vector<TrigTerm> raw;
  raw.reserve(2 * terms_.size() * other.terms_.size());
  for (const TrigTerm& p : terms_) {
    for (const TrigTerm& q : other.terms_) {
      const double a1 = p.cos_coef, b1 = p.sin_coef, a2 = q.cos_coef, b2 = q.sin_coef;
      raw.push_back({{p.omega[0] + q.omega[0], p.omega[1] + q.omega[1]},
                     0.5 * (a1 * a2 - b1 * b2), 0.5 * (a1 * b2 + b1 * a2)});
      raw.push_back({{p.omega[0] - q.omega[0], p.omega[1] - q.omega[1]},
                     0.5 * (a1 * a2 + b1 * b2), 0.5 * (b1 * a2 - a1 * b2)});
    }
  }
  return TrigPoly(std::move(raw));
}

double CellGrid::operator()(std::span<const double> y) const noexcept {
  std::array<int, 2> i0{0, 0}, i1{0, 0};
  std::array<double, 2> t{0.0, 0.0};
  for (int a = 0; a < dim; ++a) {
    double s = y[a] / length * n;
    s -= n * std::floor(s / n);
    const int i = static_cast<int>(std::floor(s));
    t[a] = s - i;
    i0[a] = i % n;
    i1[a] = (i + 1) % n;
  }
  auto at = [&](int i, int j) { return values[static_cast<std::size_t>(i) + static_cast<std::size_t>(n) * j]; };
  if (dim == 1) return (1.0 - t[0]) * at(i0[0], 0) + t[0] * at(i1[0], 0);
  return (1.0 - t[0]) * (1.0 - t[1]) * at(i0[0], i0[1]) + t[0] * (1.0 - t[1]) * at(i1[0], i0[1]) +
         (1.0 - t[0]) * t[1] * at(i0[0], i1[1]) + t[0] * t[1] * at(i1[0], i1[1]);
}

AlgebraRep::AlgebraRep(AlgebraClass cls, int dim, double period, Base base)
    : cls_(cls), dim_(dim), period_(period), base_(std::move(base)) {
  if (dim != 1 && dim != 2) throw Error(Errc::domain, "algebra representatives live in dimension 1 or 2");
  if (!(period > 0.0)) throw Error(Errc::domain, "period must be positive");
}

AlgebraRep AlgebraRep::constant(double c, int dim) {
  return AlgebraRep(AlgebraClass::periodic, dim, 1.0, TrigPoly::constant(c));
}

AlgebraRep AlgebraRep::periodic(TrigPoly poly, int dim, double period) {
  for (const TrigTerm& t : poly.terms()) {
    for (int a = 0; a < dim; ++a) {
      const double k = t.omega[a] * period / (2.0 * std::numbers::pi);
      if (std::abs(k - std::round(k)) > 1e-9) {
        throw Error(Errc::domain,
                    fmt::format("frequency {} is not a multiple of 2 pi / {}", t.omega[a], period));
      }
    }
  }
  return AlgebraRep(AlgebraClass::periodic, dim, period, std::move(poly));
}

AlgebraRep AlgebraRep::periodic(CellGrid grid) {
  if (grid.n < 1 || grid.values.size() != static_cast<std::size_t>(std::pow(grid.n, grid.dim))) {
    throw Error(Errc::shape, "cell grid value count does not match n^dim");
  }
  const int dim = grid.dim;
  const double length = grid.length;
  return AlgebraRep(AlgebraClass::periodic, dim, length, std::move(grid));
}

AlgebraRep AlgebraRep::periodic(CellCallable fn, int dim, double period) {
  return AlgebraRep(AlgebraClass::periodic, dim, period, std::move(fn));
}

AlgebraRep AlgebraRep::almost_periodic(TrigPoly poly, int dim) {
  return AlgebraRep(AlgebraClass::almost_periodic, dim, 1.0, std::move(poly));
}

AlgebraRep AlgebraRep::b_infinity(double limit, CellCallable core, double radius, int dim) {
  if (!(radius > 0.0)) throw Error(Errc::domain, "b_infinity core radius must be positive");
  for (double scale : {1.0, 2.0, 4.0}) {
    for (int a = 0; a < dim; ++a) {
      for (double sign : {-1.0, 1.0}) {
        std::array<double, 2> y{0.0, 0.0};
        y[a] = sign * scale * radius;
        if (std::abs(core(std::span<const double>(y.data(), dim))) > 1e-8) {
          throw Error(Errc::domain, fmt::format("core does not decay below 1e-8 outside radius {}", radius));
        }
      }
    }
  }
  AlgebraRep rep(AlgebraClass::b_infinity, dim, 1.0, TrigPoly::constant(limit));
  rep.core_ = std::move(core);
  rep.radius_ = radius;
  return rep;
}

double AlgebraRep::base_value(std::span<const double> y) const { return evaluate_base(base_, y); }

double AlgebraRep::operator()(std::span<const double> y) const {
  double v = base_value(y);
  if (core_) v += core_(y);
  return v;
}

AlgebraRep product(const AlgebraRep& a, const AlgebraRep& b) {
  if (a.dim() != b.dim()) throw Error(Errc::shape, "product of representatives of different dimension");
  const int dim = a.dim();
  const bool a_const = is_constant_base(a.base());
  const bool b_const = is_constant_base(b.base());

  AlgebraClass cls = AlgebraClass::periodic;
  if (a.algebra_class() == AlgebraClass::almost_periodic || b.algebra_class() == AlgebraClass::almost_periodic) {
    cls = AlgebraClass::almost_periodic;
  }
  double period = a_const ? b.period() : a.period();
  if (!a_const && !b_const && cls == AlgebraClass::periodic &&
      std::abs(a.period() - b.period()) > 1e-12 * a.period()) {
    cls = AlgebraClass::almost_periodic;
  }

  AlgebraRep::Base base;
  const auto* pa = std::get_if<TrigPoly>(&a.base());
  const auto* pb = std::get_if<TrigPoly>(&b.base());
  if (pa != nullptr && pb != nullptr) {
    base = pa->product(*pb);
  } else {
    if (cls == AlgebraClass::almost_periodic) {
      throw Error(Errc::domain, "almost periodic products need trigonometric polynomial factors");
    }
    base = CellCallable([ba = a.base(), bb = b.base()](std::span<const double> y) {
      return evaluate_base(ba, y) * evaluate_base(bb, y);
    });
  }
  if (a_const && b_const && (a.has_core() || b.has_core())) cls = AlgebraClass::b_infinity;

  AlgebraRep out(cls, dim, cls == AlgebraClass::periodic ? period : 1.0, std::move(base));
  if (a.has_core() || b.has_core()) {
    out.core_ = [a, b](std::span<const double> y) {
      const double ca = a.has_core() ? a.core()(y) : 0.0;
      const double cb = b.has_core() ? b.core()(y) : 0.0;
      return a.base_value(y) * cb + ca * b.base_value(y) + ca * cb;
    };
    out.radius_ = std::max(a.core_radius(), b.core_radius());
  }
  return out;
}

}  // namespace reiterhom::meanvalue

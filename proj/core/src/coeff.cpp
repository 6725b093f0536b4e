#include "reiterhom/coeff.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "reiterhom/error.hpp"

namespace reiterhom::coeff {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

using meanvalue::AlgebraRep;
using meanvalue::TensorTerm;
using meanvalue::TrigPoly;
using meanvalue::TrigTerm;

double param(const std::map<std::string, double>& params, const std::string& key, double fallback) {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void reject_unknown(const std::string& name, const std::map<std::string, double>& params,
                    std::initializer_list<const char*> known) {
  for (const auto& [key, value] : params) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw Error(Errc::config, fmt::format("problem '{}' has no parameter '{}'", name, key));
  }
}

// Linear flux c(y, z) lambda.
FluxFn scaled_identity(std::function<double(std::span<const double>, std::span<const double>)> c, int dim) {
  return [c = std::move(c), dim](std::span<const double> y, std::span<const double> z, double,
                                 std::span<const double> lambda) {
    const double k = c(y, z);
    FluxValue out;
    for (int i = 0; i < dim; ++i) {
      out.a[i] = k * lambda[i];
      out.da_dlambda[i][i] = k;
    }
    return out;
  };
}

AlgebraRep harmonic(double omega, bool sine, int dim = 1, int axis = 0) {
  TrigTerm t;
  t.omega[axis] = omega;
  (sine ? t.sin_coef : t.cos_coef) = 1.0;
  return AlgebraRep::periodic(TrigPoly({t}), dim, 1.0);
}

std::vector<TensorTerm> periodic_dictionary(int dim) {
  const AlgebraRep one = AlgebraRep::constant(1.0, dim);
  std::vector<TensorTerm> dict;
  dict.push_back({harmonic(kTwoPi, true, dim), one, 1.0});
  dict.push_back({harmonic(kTwoPi, false, dim), one, 1.0});
  dict.push_back({one, harmonic(kTwoPi, true, dim), 1.0});
  dict.push_back({harmonic(kTwoPi, true, dim), harmonic(kTwoPi, true, dim), 1.0});
  return dict;
}

Coefficient lin1d() {
  Coefficient c;
  c.name = "lin1d";
  c.dim = 1;
  c.phi = nfunc::NFunction::power(2.0);
  c.psi = c.phi;
  c.constants = {1.0, 1.0, 1.0, 10.0, 1.0};
  c.h = [](double) { return 0.5; };
  c.h_min = 0.5;
  c.linear_in_gradient = true;
  c.flux = scaled_identity(
      [](std::span<const double> y, std::span<const double> z) {
        return (2.0 + std::sin(kTwoPi * y[0])) * (2.0 + std::sin(kTwoPi * z[0]));
      },
      1);
  c.dictionary = periodic_dictionary(1);
  return c;
}

Coefficient const1d(double c0) {
  if (!(c0 > 0.0)) throw Error(Errc::config, "const1d needs c0 > 0");
  Coefficient c;
  c.name = "const1d";
  c.dim = 1;
  c.constants = {1.0, 1.0, 1.0, 1.1 * c0, std::min(1.0, c0)};
  c.h = [](double) { return 0.5; };
  c.h_min = 0.5;
  c.linear_in_gradient = true;
  c.flux = scaled_identity([c0](std::span<const double>, std::span<const double>) { return c0; }, 1);
  c.dictionary = periodic_dictionary(1);
  c.params = {{"c0", c0}};
  return c;
}

Coefficient plap2d(double p) {
  if (!(p >= 1.5 && p <= 6.0)) throw Error(Errc::config, fmt::format("plap2d needs 1.5 <= p <= 6, got {}", p));
  Coefficient c;
  c.name = "plap2d";
  c.dim = 2;
  c.phi = nfunc::NFunction::power(p);
  c.psi = c.phi;
  c.constants = {1.0, 1.0, 1.0, 10.0, 1.0};
  c.h = [](double) { return 0.5; };
  c.h_min = 0.5;
  c.linear_in_gradient = p == 2.0;
  c.flux = [p](std::span<const double> y, std::span<const double> z, double, std::span<const double> lambda) {
    const double cy = 2.0 + std::sin(kTwoPi * y[0]) * std::cos(kTwoPi * y[1]);
    const double cz = 2.0 + 0.5 * std::sin(kTwoPi * z[0]) + 0.5 * std::sin(kTwoPi * z[1]);
    const double k = cy * cz;
    const double n2 = lambda[0] * lambda[0] + lambda[1] * lambda[1];
    FluxValue out;
    if (n2 < 1e-28) {
      if (p == 2.0) out.da_dlambda = {Vec{k, 0.0}, Vec{0.0, k}};
      return out;
    }
    const double m = k * std::pow(n2, 0.5 * (p - 2.0));
    for (int i = 0; i < 2; ++i) {
      out.a[i] = m * lambda[i];
      for (int j = 0; j < 2; ++j) {
        out.da_dlambda[i][j] = m * ((i == j ? 1.0 : 0.0) + (p - 2.0) * lambda[i] * lambda[j] / n2);
      }
    }
    return out;
  };
  c.dictionary = periodic_dictionary(2);
  c.params = {{"p", p}};
  return c;
}

Coefficient deg1d() {
  Coefficient c;
  c.name = "deg1d";
  c.dim = 1;
  c.phi = nfunc::NFunction::power_log(1.0);
  c.psi = nfunc::NFunction::power(1.1);
  c.constants = {2.0, 1.0, 2.0, 2.0, 0.02};
  c.h = [](double t) { return 0.5 + 0.4 / (1.0 + t); };
  c.h_min = 0.5;
  c.zeta_dependent = true;
  const nfunc::NFunction phi = c.phi;
  const nfunc::NFunction phi_tilde = nfunc::complementary(phi);
  const auto theta = [phi, phi_tilde](double zeta) {
    return phi_tilde.inverse(phi(0.5 + 0.4 / (1.0 + std::abs(zeta))));
  };
  c.flux = [theta](std::span<const double>, std::span<const double>, double zeta, std::span<const double> lambda) {
    const double t = std::abs(lambda[0]);
    const double th = theta(zeta);
    const double step = 1e-6;
    const double dth = (theta(zeta + step) - theta(zeta - step)) / (2.0 * step);
    const double dens = std::log1p(t) + t / (1.0 + t);
    const double slope = 1.0 / (1.0 + t) + 1.0 / ((1.0 + t) * (1.0 + t));
    FluxValue out;
    out.da_dlambda[0][0] = th * slope;
    if (t < 1e-14) return out;
    const double sgn = lambda[0] > 0.0 ? 1.0 : -1.0;
    out.a[0] = th * dens * sgn;
    out.da_dzeta[0] = dth * dens * sgn;
    return out;
  };
  c.dictionary = periodic_dictionary(1);
  return c;
}

// The y-window 140 pi holds 70 periods of cos y and about 99 of cos(sqrt 2 y).
constexpr double kApWindow = 140.0 * std::numbers::pi;

Coefficient ap1d() {
  Coefficient c;
  c.name = "ap1d";
  c.dim = 1;
  c.structure = StructureClass::ap_periodic;
  // 2 + cos y + cos(sqrt 2 y) has infimum 0 on the line and 2.4e-4 on the
  // window, so the coercivity and monotonicity constants are small.
  c.constants = {1.0, 1.0, 1.0, 14.0, 1e-4};
  c.h = [](double) { return 1e-4; };
  c.h_min = 1e-4;
  c.cell_length_y = kApWindow;
  c.linear_in_gradient = true;
  c.flux = scaled_identity(
      [](std::span<const double> y, std::span<const double> z) {
        return (2.0 + std::cos(y[0]) + std::cos(std::numbers::sqrt2 * y[0])) * (2.0 + std::sin(kTwoPi * z[0]));
      },
      1);
  const AlgebraRep one = AlgebraRep::constant(1.0);
  c.dictionary.push_back({AlgebraRep::almost_periodic(TrigPoly({TrigTerm{{1.0, 0.0}, 1.0, 0.0}})), one, 1.0});
  c.dictionary.push_back(
      {AlgebraRep::almost_periodic(TrigPoly({TrigTerm{{std::numbers::sqrt2, 0.0}, 1.0, 0.0}})), one, 1.0});
  c.dictionary.push_back({one, harmonic(kTwoPi, true), 1.0});
  return c;
}

}  // namespace

std::string_view to_string(StructureClass cls) noexcept {
  switch (cls) {
    case StructureClass::periodic_periodic: return "periodic_periodic";
    case StructureClass::ap_periodic: return "ap_periodic";
    case StructureClass::ap_binf: return "ap_binf";
    case StructureClass::periodic_binf: return "periodic_binf";
  }
  return "?";
}

double Coefficient::theta(double zeta) const {
  return nfunc::complementary_inverse(phi, phi(h(std::abs(zeta))));
}

std::vector<std::string> catalog() { return {"lin1d", "plap2d", "deg1d", "ap1d", "const1d"}; }

Coefficient builtin_problem(const std::string& name, const std::map<std::string, double>& params) {
  if (name == "lin1d") {
    reject_unknown(name, params, {});
    return lin1d();
  }
  if (name == "plap2d") {
    reject_unknown(name, params, {"p"});
    return plap2d(param(params, "p", 2.0));
  }
  if (name == "deg1d") {
    reject_unknown(name, params, {});
    return deg1d();
  }
  if (name == "ap1d") {
    reject_unknown(name, params, {});
    return ap1d();
  }
  if (name == "const1d") {
    reject_unknown(name, params, {"c0"});
    return const1d(param(params, "c0", 2.0));
  }
  throw Error(Errc::catalog, fmt::format("unknown problem '{}'", name));
}

Coefficient planted_counterexample() {
  Coefficient c = lin1d();
  c.name = "planted";
  c.flux = scaled_identity([](std::span<const double>, std::span<const double>) { return -1.0; }, 1);
  return c;
}

FluxFn effective_integrand(const Coefficient& c) { return c.flux; }

bool HypothesisReport::all_pass() const noexcept {
  for (const auto& r : results) {
    if (!r.pass) return false;
  }
  return !results.empty();
}

const HypothesisResult* HypothesisReport::find(std::string_view name) const noexcept {
  for (const auto& r : results) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

}  // namespace reiterhom::coeff

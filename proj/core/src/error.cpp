#include "reiterhom/error.hpp"

#include <limits>

namespace reiterhom {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::range: return "range error";
    case Errc::domain: return "domain error";
    case Errc::shape: return "shape error";
    case Errc::kind: return "kind error";
    case Errc::catalog: return "catalog error";
    case Errc::solver: return "solver error";
    case Errc::coercivity: return "coercivity error";
    case Errc::resolution: return "resolution error";
    case Errc::resource: return "resource error";
    case Errc::config: return "config error";
    case Errc::io: return "I/O error";
  }
  return "error";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), message_(what) {}

SolverError::SolverError(Errc code, const std::string& what, std::vector<double> history)
    : Error(code, what), history_(std::move(history)) {}

double SolverError::last_residual() const noexcept {
  return history_.empty() ? std::numeric_limits<double>::quiet_NaN() : history_.back();
}

}  // namespace reiterhom

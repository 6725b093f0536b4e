#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace reiterhom {

/// Failure categories raised by the engine.
enum class Errc {
  range,       // argument outside a tabulated range
  domain,      // argument outside the mathematical domain
  shape,       // mesh / array mismatch
  kind,        // scalar vs vector field mismatch
  catalog,     // unknown built-in problem
  solver,      // nonlinear or linear solve did not converge
  coercivity,  // linearization not positive definite and no fallback worked
  resolution,  // mesh too coarse for the requested oscillation scale
  resource,    // cache or iteration budget exhausted
  config,      // malformed or inconsistent configuration
  io,          // file system failure
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }
  /// The message without the category prefix that what() carries.
  const std::string& message() const noexcept { return message_; }

 private:
  Errc code_;
  std::string message_;
};

/// Solver failure carrying the residual history of the failed iteration.
class SolverError : public Error {
 public:
  SolverError(Errc code, const std::string& what, std::vector<double> history);

  const std::vector<double>& residual_history() const noexcept { return history_; }
  double last_residual() const noexcept;

 private:
  std::vector<double> history_;
};

}  // namespace reiterhom

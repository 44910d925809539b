#pragma once

#include <stdexcept>
#include <string>

namespace sslab {

enum class ErrorKind {
  domain,
  index,
  classification,
  undefined_direction,
  refinement_needed,
  solver_resolution,
  outside_band,
  construction_precondition,
  budget_failure,
  stage_too_deep,
  parse,
  resolution,
  support_budget,
  precondition,
};

const char* to_string(ErrorKind kind);

/// Every module reports failures through this one exception type; the kind
/// selects the taxonomy entry and the CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by choose_power when the residual budget is not reached at m_cap.
class BudgetError : public Error {
 public:
  BudgetError(const std::string& what, double best_residual, int best_m)
      : Error(ErrorKind::budget_failure, what), best_residual_(best_residual), best_m_(best_m) {}

  double best_residual() const noexcept { return best_residual_; }
  int best_m() const noexcept { return best_m_; }

 private:
  double best_residual_;
  int best_m_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace sslab

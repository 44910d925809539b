#include "sslab/errors.hpp"

namespace sslab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::domain: return "domain error";
    case ErrorKind::index: return "index error";
    case ErrorKind::classification: return "classification error";
    case ErrorKind::undefined_direction: return "undefined direction";
    case ErrorKind::refinement_needed: return "refinement needed";
    case ErrorKind::solver_resolution: return "solver resolution error";
    case ErrorKind::outside_band: return "outside band";
    case ErrorKind::construction_precondition: return "construction precondition";
    case ErrorKind::budget_failure: return "budget failure";
    case ErrorKind::stage_too_deep: return "stage too deep";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::resolution: return "resolution error";
    case ErrorKind::support_budget: return "support budget error";
    case ErrorKind::precondition: return "precondition error";
  }
  return "error";
}

}  // namespace sslab

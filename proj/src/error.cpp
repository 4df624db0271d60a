#include "singscat/error.hpp"

namespace singscat {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::no_solution: return "no_solution";
    case ErrorKind::negative_stage: return "negative_stage";
    case ErrorKind::pre_asymptotic: return "pre_asymptotic";
    case ErrorKind::quadrature_failure: return "quadrature_failure";
    case ErrorKind::matching_failure: return "matching_failure";
    case ErrorKind::not_asymptotic: return "not_asymptotic";
    case ErrorKind::oracle_failure: return "oracle_failure";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

}  // namespace singscat

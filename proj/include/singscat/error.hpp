#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace singscat {

enum class ErrorKind {
  domain,
  precondition,
  no_solution,
  negative_stage,
  pre_asymptotic,
  quadrature_failure,
  matching_failure,
  not_asymptotic,
  oracle_failure,
  config,
};

const char* to_string(ErrorKind kind) noexcept;

/// Numerical failures carry a kind and a list of named diagnostic values
/// (bracket endpoints, residuals, locations) so callers can report them.
class Error : public std::runtime_error {
 public:
  using Detail = std::pair<std::string, double>;

  Error(ErrorKind kind, const std::string& what, std::vector<Detail> details = {})
      : std::runtime_error(what), kind_(kind), details_(std::move(details)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::vector<Detail>& details() const noexcept { return details_; }

 private:
  ErrorKind kind_;
  std::vector<Detail> details_;
};

}  // namespace singscat

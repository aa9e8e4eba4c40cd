#pragma once

#include <stdexcept>
#include <string>

namespace fpi {

/// Failure categories. The harness maps these onto process exit codes.
enum class ErrorKind {
  invalid_argument,
  dimension_mismatch,
  non_finite,
  not_contractive,
  inadmissible_schedule,
  numeric_fault,
  bound_violation,
  config,
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace fpi

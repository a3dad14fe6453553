#pragma once

#include <stdexcept>
#include <string>

namespace pke {

enum class ErrorKind {
  dimension_mismatch,
  invalid_argument,
  singular,
  torsion,
  unsupported_dimension,
  degenerate_metric,
  parse,
  resolution,
  convention,
};

/// Exception type used throughout the library. `kind()` lets callers (the CLI
/// in particular) map failures onto exit codes without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace pke

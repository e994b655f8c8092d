#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qspec {

enum class ErrorCode {
  invalid_dimension,
  invalid_input,
  regime,
  invalid_spin,
  inadmissible,
  stiffness,
  not_found,
  empty_domain,
  symmetry,
  convergence,
  solver,
  unsupported_domain,
  io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable error kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qspec

#pragma once

#include <stdexcept>
#include <string>

namespace gepa {

enum class ErrorKind {
  invalid_argument,
  coverage_mismatch,
  unscored_task,
  invalid_state,
  bounds,
  config,
  format,
  io,
  digest_mismatch,
  degenerate_variance,
  evolution_failed,
};

const char* to_string(ErrorKind kind);

// Library-wide exception; `kind` lets callers branch without matching strings.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& message);

}  // namespace gepa

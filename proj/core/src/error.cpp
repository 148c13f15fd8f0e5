#include "gepa/error.hpp"

namespace gepa {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::coverage_mismatch: return "coverage_mismatch";
    case ErrorKind::unscored_task: return "unscored_task";
    case ErrorKind::invalid_state: return "invalid_state";
    case ErrorKind::bounds: return "bounds";
    case ErrorKind::config: return "config";
    case ErrorKind::format: return "format";
    case ErrorKind::io: return "io";
    case ErrorKind::digest_mismatch: return "digest_mismatch";
    case ErrorKind::degenerate_variance: return "degenerate_variance";
    case ErrorKind::evolution_failed: return "evolution_failed";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void raise(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace gepa

#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace gepa {

struct CommandResult {
  int exit_code = -1;
  bool timed_out = false;
  bool spawn_failed = false;
  std::string output;  // stdout + stderr interleaved, truncated to output_cap
  std::string spawn_error;
  double duration_s = 0.0;
};

// Runs argv with a hard wall-clock deadline. The child gets its own process
// group; on deadline the whole group is SIGKILLed and reaped, so no orphans
// survive the call. Output beyond output_cap is discarded but still drained.
CommandResult run_command(const std::vector<std::string>& argv, double timeout_s,
                          const std::string& workdir = {}, std::size_t output_cap = 32 * 1024);

}  // namespace gepa

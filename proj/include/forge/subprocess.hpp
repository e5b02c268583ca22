#pragma once

#include <chrono>
#include <string>
#include <vector>

namespace forge {

struct CommandResult {
  int exit_code = -1;
  std::string out;
  std::string err;
  bool timed_out = false;
  bool spawn_failed = false;
  std::string spawn_error;

  bool ok() const { return !spawn_failed && !timed_out; }
};

// Runs argv[0] with the given arguments, capturing stdout and stderr. The
// child is killed (SIGKILL) once the timeout elapses. Safe to call from
// concurrent worker threads.
CommandResult run_command(const std::vector<std::string>& argv,
                          std::chrono::milliseconds timeout =
                              std::chrono::milliseconds(30000));

// True when `tool` names an executable (absolute/relative path or on PATH).
bool tool_exists(const std::string& tool);

}  // namespace forge

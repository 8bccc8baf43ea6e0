#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gibbsnls/config.hpp"

namespace gibbsnls {

/// One embedded acceptance check of an experiment.
struct Verdict {
  std::string name;
  bool pass = false;
  double value = 0.0;
  std::string threshold;
};

enum ExitCode : int {
  kExitPass = 0,
  kExitCheckFailed = 1,
  kExitConfigError = 2,
  kExitRuntimeError = 3,
};

/// Runs the configured experiment, writes its CSV/JSON outputs and
/// manifest.json into the output directory, and prints a summary to `log`.
/// Returns kExitPass iff every verdict passes. Module errors are reported
/// as a JSON error record (error.json and the manifest) with
/// kExitRuntimeError.
int run(const RunConfig& config, std::ostream& log);

/// {"error": {"type": ..., "message": ..., "experiment": ...}}.
nlohmann::json error_record(const std::string& type, const std::string& message,
                            const std::string& experiment);

/// Writes `text` to `path` through a temporary file and rename.
void write_atomically(const std::string& path, const std::string& text);

}  // namespace gibbsnls

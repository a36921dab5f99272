#pragma once

#include <string>
#include <vector>

#include "bicscat/config.hpp"

namespace bicscat {

struct CommandResult {
  bool ok = true;                        // false when a check or solve failed
  std::vector<std::string> outputs;      // files written, manifest last
  std::vector<std::string> diagnostics;
  std::vector<std::string> summary;      // human-readable lines for stdout
};

std::vector<std::string> command_names();

/// Runs one subcommand, writing its CSV files and `<command>.manifest.json`
/// into `out_dir` (created if missing). Throws InvalidConfig on bad input
/// and NumericalError subclasses on solver failures.
CommandResult run_command(const std::string& command, const RunConfig& cfg,
                          const std::string& out_dir);

}  // namespace bicscat

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "penning/config.hpp"

// Experiment dispatch for the batch front-end.

namespace penning {

inline constexpr const char* artifact_version = "1.0.0";

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_domain = 3, exit_invariant = 4 };

struct RunResult {
  std::vector<std::string> outputs;  // file names inside the output directory
  nlohmann::json summary;
};

// Runs a validated configuration, writing CSV files and metadata.json into
// out_dir (created if needed). Progress and tables go to `log`.
RunResult run(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log);

// Command-line entry: --config <path> [--out <dir>] [--threads <n>] [--seed <u64>].
// Returns one of ExitCode; errors are reported on `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace penning

#pragma once

// Command-line front end. Exit codes: 0 success, 1 run or property failure,
// 2 usage or configuration error.

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>

#include "uosl/output.hpp"
#include "uosl/scenario_io.hpp"

namespace uosl::app {

struct RunResult {
  sim::RunOutcome outcome;
  analysis::MetricReport report;
};

/// Runs a parsed scenario and computes its metrics.
RunResult run(const io::ScenarioFile& file);

/// Runs and writes `<dir>/trajectory.csv` and `<dir>/metrics.json`.
RunResult run_to_directory(const io::ScenarioFile& file, const std::filesystem::path& dir,
                           std::uint64_t seed);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace uosl::app

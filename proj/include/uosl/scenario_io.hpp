#pragma once

// Scenario files: one `key = value` per line, `#` starts a comment.
// Values are numbers, `[a, b, c]` vectors, or bare words. Dotted keys address
// nested fields; indexed groups (`setpoint.1.start`) build lists. Angles and
// angular rates are given in degrees and deg/s; everything else is SI.
//
//   name = velocity_step
//   mode = cascade
//   params.suspension_offset = [-0.12, 0, -0.05]
//   setpoint.1.start = 0.5
//   setpoint.1.load_velocity = [0, 1.5, 0]
//   disturbance.0.swing_rate = [28.6479, 0]
//
// Overrides use the same keys and may address one vector element: `key[i]=v`.

#include <stdexcept>
#include <string>
#include <vector>

#include "uosl/analysis.hpp"
#include "uosl/simulator.hpp"

namespace uosl::io {

/// Malformed text, an assignment that does not type-check, or an inconsistent
/// scenario. line() is 0 for command-line overrides and -1 for whole-file problems.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& message)
      : std::runtime_error(prefix(line) + message), line_(line) {}
  [[nodiscard]] int line() const { return line_; }

 private:
  static std::string prefix(int line) {
    if (line > 0) return "line " + std::to_string(line) + ": ";
    return line == 0 ? "override: " : "scenario: ";
  }
  int line_;
};

struct ScenarioFile {
  sim::Scenario scenario;
  analysis::ReportSpec report;
};

/// Parses scenario text, then applies `overrides` ("key=value") in order.
ScenarioFile parse_scenario(const std::string& text,
                            const std::vector<std::string>& overrides = {});

/// Reads and parses a file. Throws ParseError (line 0) if it cannot be read.
ScenarioFile load_scenario(const std::string& path,
                           const std::vector<std::string>& overrides = {});

/// Throws ParseError (line 0) unless `key` (optionally `key[i]`) names a field.
void check_key(const std::string& key);

/// Every key accepted at the top level, for diagnostics and documentation.
std::vector<std::string> known_keys();

}  // namespace uosl::io

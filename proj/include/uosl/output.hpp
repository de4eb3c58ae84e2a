#pragma once

// Trajectory CSV and metrics JSON.
//
// The CSV carries raw NED values: z grows downward, so climbing shows as
// decreasing q2 and the hover thrust F_l is negative. Angles are radians.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "uosl/analysis.hpp"

namespace uosl::io {

/// Column names in output order.
const std::vector<std::string>& csv_columns();

void write_trajectory_csv(std::ostream& out, const sim::TrajectoryLog& log);
std::string trajectory_csv(const sim::TrajectoryLog& log);

inline constexpr const char* kMetricsSchema = "uosl.metrics/1";

/// Run metadata stored next to the metrics.
struct RunInfo {
  std::string scenario;
  std::uint64_t seed = 0;
  std::optional<sim::Failure> failure;
};

nlohmann::json metrics_json(const analysis::MetricReport& report, const RunInfo& info);
/// Inverse of metrics_json for the report part. Throws std::invalid_argument on
/// a schema mismatch.
analysis::MetricReport report_from_json(const nlohmann::json& doc);

}  // namespace uosl::io

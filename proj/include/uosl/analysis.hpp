#pragma once

// Metrics over trajectory logs. All functions are pure.

#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uosl/simulator.hpp"

namespace uosl::analysis {

struct Window {
  double start = -std::numeric_limits<double>::infinity();
  double end = std::numeric_limits<double>::infinity();
};

/// Half-open index range [first, last) of the samples with start <= t <= end.
struct IndexRange {
  std::size_t first = 0;
  std::size_t last = 0;
  [[nodiscard]] std::size_t size() const { return last - first; }
  [[nodiscard]] bool empty() const { return last == first; }
};

IndexRange window_indices(std::span<const double> t, const Window& window);

/// Root mean squared pointwise difference. Throws std::invalid_argument if the
/// series are empty or differ in length.
double rmse(std::span<const double> series, std::span<const double> reference);

/// Time, measured from t.front(), after which |x - target| <= band for the rest
/// of the series. The entry instant is interpolated linearly between samples.
/// nullopt when the last sample is still outside the band.
std::optional<double> settling_time_abs(std::span<const double> t, std::span<const double> x,
                                        double target, double band);
/// Same with band = band_fraction * |target|; band_fraction must lie in (0, 1).
std::optional<double> settling_time(std::span<const double> t, std::span<const double> x,
                                    double target, double band_fraction);

/// max((peak - target) / (target - initial), 0) * 100, with the peak taken in the
/// direction of the step. Throws std::invalid_argument if target == initial.
double overshoot(std::span<const double> x, double initial, double target);

struct DecayFit {
  double rate = 0.0;      // 1/s, V ~ exp(-rate t)
  double offset = 0.0;    // log V at t = 0
  double residual = 0.0;  // RMS of the log-fit residual
};

/// Least-squares slope of log V against t. Throws std::invalid_argument on
/// non-positive values or fewer than two samples.
DecayFit decay_rate_fit(std::span<const double> t, std::span<const double> v);

struct EnergyAudit {
  std::vector<double> t;
  std::vector<double> energy;          // T + V recomputed from the logged state
  std::vector<double> relative_drift;  // (E - E0) / |E0|, or E - E0 when E0 == 0
  std::vector<double> work_rate;       // logged qd^T (B u + F_d)
  double max_relative_drift = 0.0;
  /// max over sample intervals of |dE/dt - mean work rate|, with dE/dt the
  /// difference quotient and the work rate averaged (trapezoid) over the input
  /// held during the interval
  double max_work_rate_mismatch = 0.0;
};

EnergyAudit energy_audit(const sim::TrajectoryLog& log, const Params& params);

struct Stats {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Population mean and standard deviation. Throws std::invalid_argument when empty.
Stats mean_std(std::span<const double> x);

/// What to measure and where.
struct ReportSpec {
  Window window;                      // RMSE and tension window
  std::optional<double> step_time;    // start of the step response
  double step_end = std::numeric_limits<double>::infinity();
  double band_fraction = 0.1;
  double decay_window = 0.5;          // s after step_time for the Lyapunov fits
  std::optional<double> kick_time;    // swing-kick instant for the recovery metric
  double swing_band_deg = 1.0;
};

struct MetricReport {
  std::map<std::string, double> rmse;  // channel -> RMSE in its own unit
  std::string step_channel;
  std::optional<double> settling_time;
  std::optional<double> overshoot_percent;
  std::optional<DecayFit> attitude_decay;
  std::optional<DecayFit> swing_decay;
  std::optional<double> swing_recovery_time;
  double energy_drift = 0.0;
  double tension_mean = 0.0;
  double tension_std = 0.0;
  double thrust_saturation_rate = 0.0;
  std::size_t samples = 0;
  double duration = 0.0;
  bool completed = true;
  std::string failure;
};

/// Channel names, with units: vx_p, vy_p, vz_p (m/s); phi, theta, psi (deg,
/// against the commanded attitude); alpha, beta (deg, against zero).
MetricReport compute_report(const sim::TrajectoryLog& log, const Params& params,
                            const ReportSpec& spec);

}  // namespace uosl::analysis

#pragma once

// Fixed-step closed-loop simulation of the plant under the cascade controller.

#include <optional>
#include <string>
#include <vector>

#include "uosl/controller.hpp"
#include "uosl/dynamics.hpp"

namespace uosl::sim {

enum class ControlMode {
  cascade,   // full cascade tracking a load-velocity setpoint
  attitude,  // inner loop only, tracking a fixed attitude with constant thrust
};

/// Setpoint active from `start` until the next segment begins.
struct SetpointSegment {
  double start = 0.0;
  control::Setpoint cascade;
  control::AttitudeSetpoint attitude;
};

/// Impulsive swing-rate kick applied at `time`.
struct Disturbance {
  double time = 0.0;
  Vec2 swing_rate = Vec2::Zero();
};

struct Scenario {
  std::string name = "scenario";
  ControlMode mode = ControlMode::cascade;
  GeneralizedState initial;
  std::vector<SetpointSegment> schedule{SetpointSegment{}};
  control::Gains gains;
  Params params;
  double duration = 5.0;       // s
  double dt = 1e-3;            // plant step, s
  double control_rate = 500.0; // Hz
  std::vector<Disturbance> disturbances;

  /// Throws std::invalid_argument when the timing or contents are inconsistent.
  void validate() const;
  [[nodiscard]] int steps_per_control() const;
  [[nodiscard]] long total_steps() const;
  [[nodiscard]] const SetpointSegment& segment_at(double t) const;
};

struct Sample {
  double t = 0.0;
  GeneralizedState state;
  Vec8 qddot = Vec8::Zero();
  SetpointSegment setpoint;
  control::ControlCommand command;
  dynamics::CableTension tension{Vec3::Zero(), 0.0};
  Vec3 load_velocity = Vec3::Zero();
  double attitude_lyapunov = 0.0;  // V_eta
  double swing_lyapunov = 0.0;     // V_sigma
  double energy = 0.0;             // T + V
  double work_rate = 0.0;          // qd^T (B u + F_d)
};

struct TrajectoryLog {
  std::vector<Sample> samples;
  double sample_period = 0.0;
};

struct Failure {
  double time = 0.0;
  std::string message;
  std::optional<control::Stage> stage;
};

struct RunOutcome {
  TrajectoryLog log;
  std::optional<Failure> failure;

  [[nodiscard]] bool ok() const { return !failure.has_value(); }
};

/// The state left the model's validity region or blew up.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(double time, const std::string& message)
      : std::runtime_error(message), time_(time) {}
  [[nodiscard]] double time() const { return time_; }

 private:
  double time_;
};

/// One classical RK4 step with the input held constant.
/// Throws DivergenceError if the result leaves the angle bounds or exceeds 1e6.
GeneralizedState integrate_step(const GeneralizedState& s, const ControlInput& u,
                                const Params& params, double dt);

/// Adds the kick to the swing rates; nothing else changes.
GeneralizedState inject_disturbance(const GeneralizedState& s, const Disturbance& event);

/// Deterministic closed-loop run. On failure the log holds every sample up to it.
RunOutcome run_scenario(const Scenario& scenario);

}  // namespace uosl::sim

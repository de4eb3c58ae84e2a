#include "uosl/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uosl::sim {
namespace {

constexpr double kBlowUpLimit = 1e6;

struct Derivative {
  Vec8 q;
  Vec8 qdot;
};

Derivative evaluate(const GeneralizedState& s, const ControlInput& u, const Params& params) {
  return {s.qdot, dynamics::forward_dynamics(s, u, params)};
}

GeneralizedState advance(const GeneralizedState& s, const Derivative& d, double h) {
  return {s.q + h * d.q, s.qdot + h * d.qdot};
}

void check_health(const GeneralizedState& s, double t) {
  if (!s.q.allFinite() || !s.qdot.allFinite() || s.q.cwiseAbs().maxCoeff() > kBlowUpLimit ||
      s.qdot.cwiseAbs().maxCoeff() > kBlowUpLimit) {
    throw DivergenceError(t, "state diverged (non-finite or magnitude above 1e6)");
  }
  try {
    s.validate();
  } catch (const DomainError& e) {
    throw DivergenceError(t, e.what());
  }
}

Sample make_sample(double t, const GeneralizedState& s, const SetpointSegment& setpoint,
                   const control::ControlCommand& cmd, const Params& params) {
  Sample out;
  out.t = t;
  out.state = s;
  out.setpoint = setpoint;
  out.command = cmd;
  const auto terms = dynamics::assemble_terms(s, cmd.applied, params);
  out.qddot = dynamics::solve_accelerations(terms);
  out.tension = dynamics::cable_tension(s, out.qddot, cmd.applied, params);
  out.load_velocity = dynamics::load_velocity(s, params);
  out.attitude_lyapunov = cmd.errors.attitude_lyapunov();
  out.swing_lyapunov = cmd.errors.swing_lyapunov();
  out.energy = dynamics::total_energy(s, params);
  out.work_rate = s.qdot.dot(terms.actuation + terms.drag);
  return out;
}

control::ControlCommand compute_command(const Scenario& sc, const GeneralizedState& s,
                                        const SetpointSegment& seg) {
  if (sc.mode == ControlMode::attitude) {
    return control::attitude_step(s, seg.attitude, sc.gains, sc.params);
  }
  return control::cascade_step(s, seg.cascade, sc.gains, sc.params);
}

}  // namespace

void Scenario::validate() const {
  if (!(dt > 0.0) || !(control_rate > 0.0) || !(duration >= 0.0)) {
    throw std::invalid_argument("scenario: dt and control_rate must be > 0, duration >= 0");
  }
  const double ratio = 1.0 / (control_rate * dt);
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio || std::round(ratio) < 1.0) {
    throw std::invalid_argument("scenario: control period must be an integer multiple of dt");
  }
  const double steps = duration / dt;
  if (std::abs(steps - std::round(steps)) > 1e-6) {
    throw std::invalid_argument("scenario: duration must be an integer multiple of dt");
  }
  if (schedule.empty()) {
    throw std::invalid_argument("scenario: setpoint schedule is empty");
  }
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    if (!(schedule[i].start > schedule[i - 1].start)) {
      throw std::invalid_argument("scenario: setpoint segments must have increasing start times");
    }
  }
  for (const auto& d : disturbances) {
    if (!std::isfinite(d.time) || !d.swing_rate.allFinite()) {
      throw std::invalid_argument("scenario: disturbance must be finite");
    }
  }
  params.validate();
  gains.validate();
  initial.validate();
}

int Scenario::steps_per_control() const {
  return static_cast<int>(std::lround(1.0 / (control_rate * dt)));
}

long Scenario::total_steps() const { return std::lround(duration / dt); }

const SetpointSegment& Scenario::segment_at(double t) const {
  const SetpointSegment* active = &schedule.front();
  for (const auto& seg : schedule) {
    if (seg.start <= t + 1e-12) {
      active = &seg;
    }
  }
  return *active;
}

GeneralizedState integrate_step(const GeneralizedState& s, const ControlInput& u,
                                const Params& params, double dt) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("integrate_step: dt must be > 0");
  }
  Derivative k1, k2, k3, k4;
  try {
    k1 = evaluate(s, u, params);
    k2 = evaluate(advance(s, k1, 0.5 * dt), u, params);
    k3 = evaluate(advance(s, k2, 0.5 * dt), u, params);
    k4 = evaluate(advance(s, k3, dt), u, params);
  } catch (const DomainError& e) {
    throw DivergenceError(0.0, std::string("left model domain during step: ") + e.what());
  }
  GeneralizedState next;
  next.q = s.q + (dt / 6.0) * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q);
  next.qdot = s.qdot + (dt / 6.0) * (k1.qdot + 2.0 * k2.qdot + 2.0 * k3.qdot + k4.qdot);
  check_health(next, 0.0);
  return next;
}

GeneralizedState inject_disturbance(const GeneralizedState& s, const Disturbance& event) {
  GeneralizedState out = s;
  out.qdot.segment<2>(6) += event.swing_rate;
  return out;
}

RunOutcome run_scenario(const Scenario& scenario) {
  scenario.validate();
  RunOutcome outcome;
  const int ratio = scenario.steps_per_control();
  const long steps = scenario.total_steps();
  outcome.log.sample_period = ratio * scenario.dt;

  std::vector<Disturbance> pending = scenario.disturbances;
  std::stable_sort(pending.begin(), pending.end(),
                   [](const Disturbance& a, const Disturbance& b) { return a.time < b.time; });
  std::size_t next_event = 0;

  GeneralizedState state = scenario.initial;
  control::ControlCommand command;
  double t = 0.0;
  try {
    for (long n = 0; n <= steps; ++n) {
      t = static_cast<double>(n) * scenario.dt;
      while (next_event < pending.size() && pending[next_event].time <= t + 0.5 * scenario.dt) {
        state = inject_disturbance(state, pending[next_event]);
        ++next_event;
      }
      if (n % ratio == 0) {
        const auto& seg = scenario.segment_at(t);
        command = compute_command(scenario, state, seg);
        outcome.log.samples.push_back(make_sample(t, state, seg, command, scenario.params));
      }
      if (n == steps) {
        break;
      }
      try {
        state = integrate_step(state, command.applied, scenario.params, scenario.dt);
      } catch (const DivergenceError& e) {
        throw DivergenceError(t + scenario.dt, e.what());
      }
      state.q[5] = wrap_angle(state.q[5]);
    }
  } catch (const DivergenceError& e) {
    outcome.failure = Failure{e.time(), std::string("divergence: ") + e.what(), std::nullopt};
  } catch (const control::StageError& e) {
    outcome.failure = Failure{t, std::string("controller: ") + e.what(), e.stage()};
  } catch (const std::exception& e) {
    outcome.failure = Failure{t, e.what(), std::nullopt};
  }
  return outcome;
}

}  // namespace uosl::sim

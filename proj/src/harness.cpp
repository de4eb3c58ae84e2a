#include "uosl/harness.hpp"

#include <cmath>
#include <stdexcept>

namespace uosl::sim {
namespace {

// (xi_q, xi_q_dot, sigma, sigma_dot) with the attitude pinned level.
struct SwingPlant {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec2 swing = Vec2::Zero();
  Vec2 swing_rate = Vec2::Zero();

  [[nodiscard]] GeneralizedState state() const {
    GeneralizedState s;
    s.q.segment<3>(0) = position;
    s.q.segment<2>(6) = swing;
    s.qdot.segment<3>(0) = velocity;
    s.qdot.segment<2>(6) = swing_rate;
    return s;
  }

  SwingPlant operator+(const SwingPlant& o) const {
    return {position + o.position, velocity + o.velocity, swing + o.swing,
            swing_rate + o.swing_rate};
  }
  SwingPlant operator*(double h) const {
    return {position * h, velocity * h, swing * h, swing_rate * h};
  }
};

struct SwingLoop {
  const Params& params;
  const control::Gains& gains;
  SwingAngles target;
  double tension;

  [[nodiscard]] control::ErrorState errors(const GeneralizedState& s) const {
    control::ErrorState e;
    e.swing = target.vec() - s.sigma().vec();
    e.swing_rate = -s.sigma_dot() + gains.swing.cwiseProduct(e.swing);
    return e;
  }

  [[nodiscard]] SwingPlant derivative(const SwingPlant& x) const {
    const GeneralizedState s = x.state();
    const DragSet drag = dynamics::drag_forces(s.q, s.qdot, params);
    const auto reduced = dynamics::reduced_swing_terms(s, params);
    const Vec2 virtual_accel = control::middle_swing_law(errors(s), {}, gains, reduced);
    const Vec3 accel =
        control::acceleration_decoupler(s.sigma(), virtual_accel, tension, drag, params);
    const Vec2 bias = reduced.coriolis + reduced.gravity - reduced.drag;
    const Vec2 swing_accel =
        -reduced.map * accel - reduced.inertia.diagonal().cwiseInverse().cwiseProduct(bias);
    return {x.velocity, accel, x.swing_rate, swing_accel};
  }
};

template <typename State, typename F>
State rk4(const State& x, double dt, const F& f) {
  const State k1 = f(x);
  const State k2 = f(x + k1 * (0.5 * dt));
  const State k3 = f(x + k2 * (0.5 * dt));
  const State k4 = f(x + k3 * dt);
  return x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
}

void check_timing(double duration, double dt) {
  if (!(dt > 0.0) || !(duration >= 0.0)) {
    throw std::invalid_argument("harness: dt must be > 0 and duration >= 0");
  }
}

}  // namespace

LoopTrace run_ideal_swing_loop(const Params& params, const control::Gains& gains,
                               const SwingAngles& initial, const Vec2& initial_rate,
                               const SwingAngles& target, double duration, double dt) {
  check_timing(duration, dt);
  spatial::check_swing(target);
  const double tension = -params.load_mass * params.gravity /
                         (std::cos(target.alpha) * std::cos(target.beta));
  const SwingLoop loop{params, gains, target, tension};
  SwingPlant x;
  x.swing = initial.vec();
  x.swing_rate = initial_rate;

  LoopTrace trace;
  const long steps = std::lround(duration / dt);
  for (long n = 0; n <= steps; ++n) {
    const GeneralizedState s = x.state();
    trace.t.push_back(static_cast<double>(n) * dt);
    trace.lyapunov.push_back(loop.errors(s).swing_lyapunov());
    trace.swing.push_back(x.swing);
    if (n < steps) {
      x = rk4(x, dt, [&](const SwingPlant& y) { return loop.derivative(y); });
    }
  }
  return trace;
}

LoopTrace run_ideal_tension_loop(const Params& params, const control::Gains& gains,
                                 const Vec3& initial_velocity, const Vec3& target_velocity,
                                 double duration, double dt) {
  check_timing(duration, dt);
  if (!(params.load_mass > 0.0)) {
    throw std::invalid_argument("harness: load mass must be > 0");
  }
  control::Setpoint setpoint;
  setpoint.load_velocity = target_velocity;
  auto accel = [&](const Vec3& v) -> Vec3 {
    GeneralizedState s;
    s.qdot.segment<3>(0) = v;
    const DragSet drag = dynamics::drag_forces(s.q, s.qdot, params);
    const Vec3 error = target_velocity - dynamics::load_velocity(s, params);
    const Vec3 tension = control::outer_velocity_law(s, error, setpoint, gains, params, drag);
    return (tension + params.load_mass * params.gravity_vector() + drag.load) / params.load_mass;
  };

  LoopTrace trace;
  Vec3 v = initial_velocity;
  const long steps = std::lround(duration / dt);
  for (long n = 0; n <= steps; ++n) {
    const Vec3 e = target_velocity - v;
    trace.t.push_back(static_cast<double>(n) * dt);
    trace.velocity_error.push_back(e);
    trace.lyapunov.push_back(0.5 * e.squaredNorm());
    if (n < steps) {
      v = rk4(v, dt, accel);
    }
  }
  return trace;
}

}  // namespace uosl::sim

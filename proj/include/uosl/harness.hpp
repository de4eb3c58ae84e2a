#pragma once

// Idealised single-loop harnesses. Each closes one loop of the cascade with
// its virtual input realised exactly, so the loop's exponential decay can be
// measured in isolation.

#include <vector>

#include "uosl/controller.hpp"

namespace uosl::sim {

struct LoopTrace {
  std::vector<double> t;
  std::vector<double> lyapunov;       // V_sigma, or |e|^2/2 for the velocity loop
  std::vector<Vec3> velocity_error;   // velocity loop only
  std::vector<Vec2> swing;            // swing loop only
};

/// Middle loop with the suspension point accelerating exactly at xi_dd_d.
/// The UAV attitude is held level; the swing follows the reduced swing model.
LoopTrace run_ideal_swing_loop(const Params& params, const control::Gains& gains,
                               const SwingAngles& initial, const Vec2& initial_rate,
                               const SwingAngles& target, double duration, double dt);

/// Outer loop with the cable tension equal to F_td at every instant.
LoopTrace run_ideal_tension_loop(const Params& params, const control::Gains& gains,
                                 const Vec3& initial_velocity, const Vec3& target_velocity,
                                 double duration, double dt);

}  // namespace uosl::sim

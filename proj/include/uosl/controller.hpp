#pragma once

// Cascade controller for the off-centre slung-load quadrotor:
//   outer load-velocity law -> tension decomposition -> middle swing law
//   -> acceleration decoupler -> thrust limit -> attitude decoupler
//   -> inner attitude law -> mixer.
//
// Every function here is pure. cascade_step() holds no state between calls.

#include <stdexcept>
#include <string>
#include <string_view>

#include "uosl/dynamics.hpp"

namespace uosl::control {

/// Diagonal gain entries; all must be positive.
struct Gains {
  Vec3 attitude{13.6, 13.6, 5.2};       // K_eta
  Vec3 attitude_rate{13.6, 13.6, 5.2};  // K_p_eta
  Vec2 swing{3.2, 3.2};                 // K_sigma
  Vec2 swing_rate{3.2, 3.2};            // K_p_sigma
  Vec3 load_velocity{1.4, 1.4, 4.0};    // k_xidot_p

  void validate() const;
};

struct Setpoint {
  Vec3 load_velocity = Vec3::Zero();     // desired load velocity, m/s (NED)
  double yaw = 0.0;                      // psi_d, rad
  Vec3 attitude_accel_ff = Vec3::Zero(); // eta_dd_d
  Vec2 swing_accel_ff = Vec2::Zero();    // sigma_dd_d
  Vec3 load_accel_ff = Vec3::Zero();     // xi_dd_pd
};

/// Inner-loop-only reference: attitude held at `attitude` with constant thrust.
struct AttitudeSetpoint {
  EulerAngles attitude;
  double thrust = 0.0;                   // F_l, N (negative lifts)
  Vec3 attitude_accel_ff = Vec3::Zero();
};

struct ErrorState {
  Vec3 load_velocity = Vec3::Zero();  // e_xidot_p
  Vec3 attitude = Vec3::Zero();       // e_eta
  Vec3 attitude_rate = Vec3::Zero();  // e_p_eta
  Vec2 swing = Vec2::Zero();          // e_sigma
  Vec2 swing_rate = Vec2::Zero();     // e_p_sigma

  /// V_eta = |[e_eta; e_p_eta]|^2 / 2
  [[nodiscard]] double attitude_lyapunov() const;
  /// V_sigma = |[e_sigma; e_p_sigma]|^2 / 2
  [[nodiscard]] double swing_lyapunov() const;
};

enum class Stage {
  errors,
  outer_velocity,
  tension_decomposition,
  middle_swing,
  acceleration_decoupler,
  desired_thrust,
  thrust_saturation,
  attitude_decoupler,
  tension_feedforward,
  inner_attitude,
  mixer,
};

std::string_view stage_name(Stage stage);

/// A controller stage failed; what() is prefixed with the stage name.
class StageError : public std::runtime_error {
 public:
  StageError(Stage stage, const std::string& message)
      : std::runtime_error(std::string(stage_name(stage)) + ": " + message), stage_(stage) {}
  [[nodiscard]] Stage stage() const { return stage_; }

 private:
  Stage stage_;
};

struct TensionSetpoint {
  double magnitude = 0.0;  // signed F_td, negative when the cable pulls the load up
  SwingAngles swing;       // sigma_d
};

struct ThrustLimit {
  Vec3 force;
  bool active = false;
};

struct AttitudeThrust {
  double roll = 0.0;    // phi_d
  double pitch = 0.0;   // theta_d
  double thrust = 0.0;  // F_l
};

struct TensionFeedforward {
  Vec3 load_accel = Vec3::Zero();   // predicted xi_dd_p
  Vec2 swing_accel = Vec2::Zero();  // model-consistent sigma_dd used in R_p^i double dot
  Vec3 tension = Vec3::Zero();      // predicted F_t
  Vec3 torque = Vec3::Zero();       // tau_Ft
};

struct RotorCommand {
  Vec4 thrusts = Vec4::Zero();
  bool saturated = false;
};

struct BodyWrench {
  double thrust = 0.0;          // F_l
  Vec3 torque = Vec3::Zero();   // tau_b, body frame
};

struct ControlCommand {
  ControlInput requested;     // [F_l, tau_eta] before rotor limits
  ControlInput applied;       // what the rotors actually deliver
  RotorCommand rotors;
  bool thrust_limited = false;

  Vec3 tension_setpoint = Vec3::Zero();  // F_td vector
  TensionSetpoint tension;               // F_td scalar and sigma_d
  EulerAngles attitude_setpoint;         // (phi_d, theta_d, psi_d)
  Vec3 suspension_accel = Vec3::Zero();  // xi_dd_d
  Vec2 swing_virtual_accel = Vec2::Zero();     // sigma_dd_v
  Vec3 thrust_setpoint = Vec3::Zero();         // F_ld
  Vec3 thrust_setpoint_limited = Vec3::Zero(); // F_ld^r
  Vec3 attitude_reference_accel = Vec3::Zero();  // eta_dd_tr
  TensionFeedforward feedforward;
  ErrorState errors;
};

ErrorState compute_errors(const GeneralizedState& s, const Setpoint& setpoint,
                          const EulerAngles& attitude_setpoint, const SwingAngles& swing_setpoint,
                          const Gains& gains, const Params& params,
                          const Vec3& attitude_setpoint_rate = Vec3::Zero(),
                          const Vec2& swing_setpoint_rate = Vec2::Zero());

/// F_td = k e + m_p xidd_pd + C_xi qd - m_p g - D_xi_p
Vec3 outer_velocity_law(const GeneralizedState& s, const Vec3& velocity_error,
                        const Setpoint& setpoint, const Gains& gains, const Params& params,
                        const DragSet& drag);

/// Solves F_td = R_pd^i [0 0 F_td] for (F_td, alpha_d, beta_d).
/// Throws RegimeError unless the vertical component is negative.
TensionSetpoint tension_decompose(const Vec3& tension);

/// sigma_dd_v, defined so that M_sigma xi_dd_d = -sigma_dd_v.
Vec2 middle_swing_law(const ErrorState& errors, const Setpoint& setpoint, const Gains& gains,
                      const dynamics::ReducedSwingTerms& swing);

/// Suspension-point acceleration realising sigma_dd_v and the axial tension.
Vec3 acceleration_decoupler(const SwingAngles& sigma, const Vec2& swing_virtual_accel,
                            double tension, const DragSet& drag, const Params& params);

Vec3 desired_thrust_vector(const Vec3& suspension_accel, double tension,
                           const SwingAngles& swing_setpoint, const DragSet& drag,
                           const Params& params);

/// Clamps |F| to `limit` while preserving the vertical component when possible.
/// Throws RegimeError if F_z >= 0 or limit <= 0.
ThrustLimit thrust_saturation(const Vec3& thrust, double limit);

/// Extracts (phi_d, theta_d, F_l) from a thrust vector at yaw psi.
/// Throws RegimeError if F_z >= 0.
AttitudeThrust attitude_decoupler(const Vec3& thrust, double yaw);

/// eta_dd_tr = (I - K^2) e_eta + (K + K_p) e_p_eta
Vec3 attitude_reference_acceleration(const ErrorState& errors, const Gains& gains);

/// Predicts the cable tension produced when the attitude follows `attitude_accel`
/// under thrust F_l, and the resulting torque about the UAV CoM.
TensionFeedforward tension_feedforward(const GeneralizedState& s, const Vec3& attitude_accel,
                                       double thrust, const Params& params, const DragSet& drag);

/// tau_eta = J_q (eta_dd_tr + eta_dd_d) - tau_Ft + Ct_eta eta_dot - D_eta
Vec3 inner_attitude_law(const GeneralizedState& s, const Vec3& attitude_reference_accel,
                        const Vec3& attitude_accel_ff, const Vec3& tension_torque,
                        const Params& params, const DragSet& drag);

/// Rotor thrusts -> (F_l, tau_b).
BodyWrench allocate(const Vec4& rotor_thrusts, const Params& params);
/// Exact inverse of allocate, without limits.
Vec4 mix_unclamped(double thrust, const Vec3& body_torque, const Params& params);
/// mix_unclamped followed by clamping to [rotor_min_thrust, rotor_max_thrust].
RotorCommand mixer(double thrust, const Vec3& body_torque, const Params& params);

/// Full cascade at one control instant.
ControlCommand cascade_step(const GeneralizedState& s, const Setpoint& setpoint,
                            const Gains& gains, const Params& params);

/// Inner attitude loop alone (outer and middle loops bypassed).
ControlCommand attitude_step(const GeneralizedState& s, const AttitudeSetpoint& setpoint,
                             const Gains& gains, const Params& params);

}  // namespace uosl::control

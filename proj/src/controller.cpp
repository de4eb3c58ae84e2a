#include "uosl/controller.hpp"

#include <cmath>
#include <utility>

namespace uosl::control {
namespace {

template <typename F>
auto run_stage(Stage stage, F&& fn) -> decltype(fn()) {
  try {
    return std::forward<F>(fn)();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

Mat4 allocation_matrix(const Params& params) {
  const double lra = params.arm_length / std::sqrt(2.0);
  const double cq = params.rotor_torque_coeff;
  Mat4 a;
  a << -1, -1, -1, -1,
       -lra, lra, lra, -lra,
       lra, -lra, lra, -lra,
       cq, cq, -cq, -cq;
  return a;
}

// Converts requested (F_l, tau_eta) to rotor thrusts and back to what the
// rotors deliver.
void finish_command(const GeneralizedState& s, const Params& params, ControlCommand& cmd) {
  run_stage(Stage::mixer, [&] {
    const Mat3 rv = spatial::euler_rate_map(s.eta());
    const Vec3 body_torque = rv.transpose().partialPivLu().solve(cmd.requested.torque);
    cmd.rotors = mixer(cmd.requested.thrust, body_torque, params);
    const BodyWrench delivered = allocate(cmd.rotors.thrusts, params);
    cmd.applied.thrust = delivered.thrust;
    cmd.applied.torque = rv.transpose() * delivered.torque;
  });
}

}  // namespace

void Gains::validate() const {
  const bool ok = (attitude.array() > 0.0).all() && (attitude_rate.array() > 0.0).all() &&
                  (swing.array() > 0.0).all() && (swing_rate.array() > 0.0).all() &&
                  (load_velocity.array() > 0.0).all();
  if (!ok) {
    throw std::invalid_argument("invalid gains: all diagonal entries must be > 0");
  }
}

double ErrorState::attitude_lyapunov() const {
  return 0.5 * (attitude.squaredNorm() + attitude_rate.squaredNorm());
}

double ErrorState::swing_lyapunov() const {
  return 0.5 * (swing.squaredNorm() + swing_rate.squaredNorm());
}

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::errors: return "errors";
    case Stage::outer_velocity: return "outer_velocity";
    case Stage::tension_decomposition: return "tension_decomposition";
    case Stage::middle_swing: return "middle_swing";
    case Stage::acceleration_decoupler: return "acceleration_decoupler";
    case Stage::desired_thrust: return "desired_thrust";
    case Stage::thrust_saturation: return "thrust_saturation";
    case Stage::attitude_decoupler: return "attitude_decoupler";
    case Stage::tension_feedforward: return "tension_feedforward";
    case Stage::inner_attitude: return "inner_attitude";
    case Stage::mixer: return "mixer";
  }
  return "unknown";
}

ErrorState compute_errors(const GeneralizedState& s, const Setpoint& setpoint,
                          const EulerAngles& attitude_setpoint, const SwingAngles& swing_setpoint,
                          const Gains& gains, const Params& params,
                          const Vec3& attitude_setpoint_rate, const Vec2& swing_setpoint_rate) {
  ErrorState e;
  e.load_velocity = setpoint.load_velocity - dynamics::load_velocity(s, params);
  e.attitude = attitude_setpoint.vec() - s.eta().vec();
  e.attitude.z() = wrap_angle(e.attitude.z());
  e.attitude_rate = attitude_setpoint_rate - s.eta_dot() + gains.attitude.cwiseProduct(e.attitude);
  e.swing = swing_setpoint.vec() - s.sigma().vec();
  e.swing_rate = swing_setpoint_rate - s.sigma_dot() + gains.swing.cwiseProduct(e.swing);
  return e;
}

Vec3 outer_velocity_law(const GeneralizedState& s, const Vec3& velocity_error,
                        const Setpoint& setpoint, const Gains& gains, const Params& params,
                        const DragSet& drag) {
  const Vec8 coriolis = dynamics::coriolis_matrix(s.q, s.qdot, params) * s.qdot;
  return gains.load_velocity.cwiseProduct(velocity_error) +
         params.load_mass * setpoint.load_accel_ff + coriolis.head<3>() -
         params.load_mass * params.gravity_vector() - drag.load;
}

TensionSetpoint tension_decompose(const Vec3& tension) {
  if (!tension.allFinite() || !(tension.z() < 0.0)) {
    throw RegimeError("desired tension must have a negative vertical component, got z=" +
                      std::to_string(tension.z()));
  }
  TensionSetpoint out;
  out.swing.beta = std::atan(tension.x() / tension.z());
  out.swing.alpha = -std::atan(tension.y() * std::cos(out.swing.beta) / tension.z());
  out.magnitude = tension.z() / (std::cos(out.swing.alpha) * std::cos(out.swing.beta));
  return out;
}

Vec2 middle_swing_law(const ErrorState& errors, const Setpoint& setpoint, const Gains& gains,
                      const dynamics::ReducedSwingTerms& swing) {
  const Vec2 k = gains.swing;
  const Vec2 kp = gains.swing_rate;
  const Vec2 shaping = (Vec2::Ones() - k.cwiseProduct(k)).cwiseProduct(errors.swing) +
                       (k + kp).cwiseProduct(errors.swing_rate);
  const Vec2 bias = swing.full_coriolis + swing.gravity - swing.drag;
  return setpoint.swing_accel_ff + shaping + swing.inertia.diagonal().cwiseInverse().cwiseProduct(bias);
}

Vec3 acceleration_decoupler(const SwingAngles& sigma, const Vec2& swing_virtual_accel,
                            double tension, const DragSet& drag, const Params& params) {
  spatial::check_swing(sigma);
  if (!(params.load_mass > 0.0)) {
    throw SingularMatrixError("acceleration decoupler needs a positive load mass");
  }
  const Mat3 rp = spatial::rot_load_to_inertial(sigma);
  const double kappa =
      (tension + rp.col(2).dot(drag.load + params.load_mass * params.gravity_vector())) /
      params.load_mass;
  const double ca = std::cos(sigma.alpha), sa = std::sin(sigma.alpha);
  const double cb = std::cos(sigma.beta), sb = std::sin(sigma.beta);
  const double l = params.cable_length;
  const double aa = swing_virtual_accel.x();
  const double ab = swing_virtual_accel.y();
  return {ca * sb * kappa - l * ca * cb * ab + l * sa * sb * aa,
          l * ca * aa - sa * kappa,
          ca * cb * kappa + l * ca * sb * ab + l * sa * cb * aa};
}

Vec3 desired_thrust_vector(const Vec3& suspension_accel, double tension,
                           const SwingAngles& swing_setpoint, const DragSet& drag,
                           const Params& params) {
  const Mat3 rpd = spatial::rot_load_to_inertial(swing_setpoint);
  return params.uav_mass * suspension_accel + rpd.col(2) * tension -
         params.uav_mass * params.gravity_vector() - drag.uav;
}

ThrustLimit thrust_saturation(const Vec3& thrust, double limit) {
  if (!(limit > 0.0)) {
    throw RegimeError("thrust limit must be positive");
  }
  if (!thrust.allFinite() || !(thrust.z() < 0.0)) {
    throw RegimeError("desired thrust must point up (F_z < 0), got z=" +
                      std::to_string(thrust.z()));
  }
  if (thrust.z() < -limit) {
    return {Vec3(0.0, 0.0, -limit), true};
  }
  const double norm_sq = thrust.squaredNorm();
  if (norm_sq > limit * limit) {
    const double fz_sq = thrust.z() * thrust.z();
    const double h = std::sqrt(limit * limit - fz_sq) / std::sqrt(norm_sq - fz_sq);
    return {Vec3(h * thrust.x(), h * thrust.y(), thrust.z()), true};
  }
  return {thrust, false};
}

AttitudeThrust attitude_decoupler(const Vec3& thrust, double yaw) {
  if (!thrust.allFinite() || !(thrust.z() < 0.0)) {
    throw RegimeError("thrust vector must point up (F_z < 0), got z=" +
                      std::to_string(thrust.z()));
  }
  const double cps = std::cos(yaw), sps = std::sin(yaw);
  AttitudeThrust out;
  out.pitch = std::atan((thrust.x() * cps + thrust.y() * sps) / thrust.z());
  out.roll = -std::atan((-thrust.x() * sps + thrust.y() * cps) * std::cos(out.pitch) / thrust.z());
  out.thrust = thrust.z() / (std::cos(out.roll) * std::cos(out.pitch));
  return out;
}

Vec3 attitude_reference_acceleration(const ErrorState& errors, const Gains& gains) {
  const Vec3 k = gains.attitude;
  const Vec3 kp = gains.attitude_rate;
  return (Vec3::Ones() - k.cwiseProduct(k)).cwiseProduct(errors.attitude) +
         (k + kp).cwiseProduct(errors.attitude_rate);
}

TensionFeedforward tension_feedforward(const GeneralizedState& s, const Vec3& attitude_accel,
                                       double thrust, const Params& params, const DragSet& drag) {
  TensionFeedforward out;
  const auto eta = s.eta();
  const Mat3 rb = spatial::rot_body_to_inertial(eta);
  if (params.load_mass <= 0.0) {
    return out;
  }
  // Swing acceleration consistent with the translational and swing rows of
  // the equations of motion when eta_dd = attitude_accel.
  const auto terms = dynamics::assemble_terms(s, ControlInput{thrust, Vec3::Zero()}, params);
  const Vec8 rhs = terms.rhs();
  constexpr std::array<int, 5> free_rows{0, 1, 2, 6, 7};
  Eigen::Matrix<double, 5, 5> a;
  Eigen::Matrix<double, 5, 1> b;
  for (int r = 0; r < 5; ++r) {
    const int i = free_rows[r];
    b[r] = rhs[i] - terms.mass.block<1, 3>(i, 3).dot(attitude_accel);
    for (int c = 0; c < 5; ++c) {
      a(r, c) = terms.mass(i, free_rows[c]);
    }
  }
  const Eigen::LLT<Eigen::Matrix<double, 5, 5>> llt(a);
  if (llt.info() != Eigen::Success) {
    throw SingularMatrixError("translational/swing block of the mass matrix is singular");
  }
  const Eigen::Matrix<double, 5, 1> x = llt.solve(b);
  out.swing_accel = x.tail<2>();

  // load acceleration from the suspension-point kinematics
  const auto body = spatial::body_rotation_derivatives(eta, s.eta_dot(), attitude_accel);
  const auto load = spatial::load_rotation_derivatives(s.sigma(), s.sigma_dot(), out.swing_accel);
  const double m_q = params.uav_mass;
  out.load_accel = (rb.col(2) * thrust +
                    m_q * (body.second * params.suspension_offset +
                           load.second * params.cable_vector()) +
                    drag.uav + drag.load) /
                       params.total_mass() +
                   params.gravity_vector();
  out.tension = params.load_mass * out.load_accel -
                params.load_mass * params.gravity_vector() - drag.load;
  // moment of the force the load exerts through the suspension point
  const Vec3 load_force_body = rb.transpose() * (out.tension + drag.load);
  out.torque =
      spatial::euler_rate_map(eta).transpose() * (-params.suspension_offset.cross(load_force_body));
  return out;
}

Vec3 inner_attitude_law(const GeneralizedState& s, const Vec3& attitude_reference_accel,
                        const Vec3& attitude_accel_ff, const Vec3& tension_torque,
                        const Params& params, const DragSet& drag) {
  const auto eta = s.eta();
  const Mat3 inertia = dynamics::attitude_inertia(eta, params);
  const Mat3 coriolis = dynamics::attitude_coriolis(eta, s.eta_dot(), params);
  return inertia * (attitude_reference_accel + attitude_accel_ff) - tension_torque +
         coriolis * s.eta_dot() - drag.attitude;
}

BodyWrench allocate(const Vec4& rotor_thrusts, const Params& params) {
  if (!(params.arm_length > 0.0) || !(params.rotor_torque_coeff > 0.0)) {
    throw SingularMatrixError("allocation is singular: arm length and torque coefficient must be > 0");
  }
  const Vec4 w = allocation_matrix(params) * rotor_thrusts;
  return {w[0], w.tail<3>()};
}

Vec4 mix_unclamped(double thrust, const Vec3& body_torque, const Params& params) {
  if (!(params.arm_length > 0.0) || !(params.rotor_torque_coeff > 0.0)) {
    throw SingularMatrixError("allocation is singular: arm length and torque coefficient must be > 0");
  }
  // rows of the allocation matrix are mutually orthogonal: A^-1 = A^T diag(1/|row|^2)
  const Mat4 a = allocation_matrix(params);
  const Vec4 w(thrust, body_torque.x(), body_torque.y(), body_torque.z());
  const Vec4 row_norm_sq = a.rowwise().squaredNorm();
  return a.transpose() * w.cwiseQuotient(row_norm_sq);
}

RotorCommand mixer(double thrust, const Vec3& body_torque, const Params& params) {
  const Vec4 raw = mix_unclamped(thrust, body_torque, params);
  RotorCommand out;
  out.thrusts = raw.cwiseMax(params.rotor_min_thrust).cwiseMin(params.rotor_max_thrust);
  out.saturated = (out.thrusts - raw).cwiseAbs().maxCoeff() > 0.0;
  return out;
}

ControlCommand cascade_step(const GeneralizedState& s, const Setpoint& setpoint,
                            const Gains& gains, const Params& params) {
  ControlCommand cmd;
  const DragSet drag = run_stage(Stage::errors, [&] {
    s.validate();
    return dynamics::drag_forces(s.q, s.qdot, params);
  });

  // 1. outer loop: desired tension vector
  cmd.errors.load_velocity = run_stage(Stage::errors, [&] {
    return Vec3(setpoint.load_velocity - dynamics::load_velocity(s, params));
  });
  cmd.tension_setpoint = run_stage(Stage::outer_velocity, [&] {
    return outer_velocity_law(s, cmd.errors.load_velocity, setpoint, gains, params, drag);
  });

  // 2. tension magnitude and swing setpoint
  cmd.tension = run_stage(Stage::tension_decomposition,
                          [&] { return tension_decompose(cmd.tension_setpoint); });

  // 3. middle loop
  cmd.swing_virtual_accel = run_stage(Stage::middle_swing, [&] {
    cmd.errors.swing = cmd.tension.swing.vec() - s.sigma().vec();
    // desired swing and attitude rates are taken as zero
    cmd.errors.swing_rate = -s.sigma_dot() + gains.swing.cwiseProduct(cmd.errors.swing);
    const auto reduced = dynamics::reduced_swing_terms(s, params);
    return middle_swing_law(cmd.errors, setpoint, gains, reduced);
  });

  // 4. decoupler: suspension acceleration -> thrust vector -> attitude and F_l
  cmd.suspension_accel = run_stage(Stage::acceleration_decoupler, [&] {
    return acceleration_decoupler(s.sigma(), cmd.swing_virtual_accel, cmd.tension.magnitude,
                                  drag, params);
  });
  cmd.thrust_setpoint = run_stage(Stage::desired_thrust, [&] {
    return desired_thrust_vector(cmd.suspension_accel, cmd.tension.magnitude, cmd.tension.swing,
                                 drag, params);
  });
  const ThrustLimit limited = run_stage(Stage::thrust_saturation, [&] {
    return thrust_saturation(cmd.thrust_setpoint, params.thrust_limit);
  });
  cmd.thrust_setpoint_limited = limited.force;
  cmd.thrust_limited = limited.active;
  const AttitudeThrust attitude = run_stage(Stage::attitude_decoupler, [&] {
    return attitude_decoupler(limited.force, s.eta().psi);
  });
  cmd.attitude_setpoint = {attitude.roll, attitude.pitch, setpoint.yaw};
  cmd.requested.thrust = attitude.thrust;

  // 5. inner loop
  cmd.attitude_reference_accel = run_stage(Stage::inner_attitude, [&] {
    cmd.errors.attitude = cmd.attitude_setpoint.vec() - s.eta().vec();
    cmd.errors.attitude.z() = wrap_angle(cmd.errors.attitude.z());
    cmd.errors.attitude_rate = -s.eta_dot() + gains.attitude.cwiseProduct(cmd.errors.attitude);
    return attitude_reference_acceleration(cmd.errors, gains);
  });
  cmd.feedforward = run_stage(Stage::tension_feedforward, [&] {
    return tension_feedforward(s, cmd.attitude_reference_accel + setpoint.attitude_accel_ff,
                               cmd.requested.thrust, params, drag);
  });
  cmd.requested.torque = run_stage(Stage::inner_attitude, [&] {
    return inner_attitude_law(s, cmd.attitude_reference_accel, setpoint.attitude_accel_ff,
                              cmd.feedforward.torque, params, drag);
  });

  finish_command(s, params, cmd);
  return cmd;
}

ControlCommand attitude_step(const GeneralizedState& s, const AttitudeSetpoint& setpoint,
                             const Gains& gains, const Params& params) {
  ControlCommand cmd;
  const DragSet drag = run_stage(Stage::errors, [&] {
    s.validate();
    return dynamics::drag_forces(s.q, s.qdot, params);
  });
  cmd.attitude_setpoint = setpoint.attitude;
  cmd.requested.thrust = setpoint.thrust;
  // swing is not regulated here; errors are reported against the hanging rest
  cmd.errors.swing = -s.sigma().vec();
  cmd.errors.swing_rate = -s.sigma_dot() + gains.swing.cwiseProduct(cmd.errors.swing);
  cmd.attitude_reference_accel = run_stage(Stage::inner_attitude, [&] {
    cmd.errors.attitude = setpoint.attitude.vec() - s.eta().vec();
    cmd.errors.attitude.z() = wrap_angle(cmd.errors.attitude.z());
    cmd.errors.attitude_rate = -s.eta_dot() + gains.attitude.cwiseProduct(cmd.errors.attitude);
    return attitude_reference_acceleration(cmd.errors, gains);
  });
  cmd.feedforward = run_stage(Stage::tension_feedforward, [&] {
    return tension_feedforward(s, cmd.attitude_reference_accel + setpoint.attitude_accel_ff,
                               setpoint.thrust, params, drag);
  });
  cmd.requested.torque = run_stage(Stage::inner_attitude, [&] {
    return inner_attitude_law(s, cmd.attitude_reference_accel, setpoint.attitude_accel_ff,
                              cmd.feedforward.torque, params, drag);
  });
  finish_command(s, params, cmd);
  return cmd;
}

}  // namespace uosl::control

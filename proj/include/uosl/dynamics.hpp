#pragma once

// 8-DoF Euler-Lagrange model of a quadrotor carrying a slung load hung from a
// point offset from the UAV's centre of mass.
//
// Generalized coordinates q = [xi_q (3, NED position of the UAV CoM);
//                             eta (3, ZYX Euler angles);
//                             sigma (2, load swing angles)].
//
// Equation of motion: M(q) qdd + C(q, qd) qd + G(q) = B(q) u + F_d(q, qd),
// with u = [F_l, tau_eta] and F_l <= 0 (thrust acts along -z_b in NED).

#include "uosl/spatial.hpp"
#include "uosl/types.hpp"

namespace uosl {

/// Physical parameters. Defaults are the experimental platform values with
/// the first suspension offset used in flight; drag defaults to zero.
struct Params {
  double uav_mass = 1.32;                          // kg
  double load_mass = 0.066;                        // kg
  Vec3 uav_inertia{12.71e-3, 12.71e-3, 2.37e-3};   // principal moments, kg m^2
  Vec3 suspension_offset{-0.12, 0.0, -0.05};       // body frame, m
  double cable_length = 1.0;                       // m
  double arm_length = 0.225;                       // rotor axis to CoM, m
  double rotor_torque_coeff = 0.016;               // reaction torque per unit thrust, m
  double gravity = 9.81;                           // m/s^2
  Vec3 uav_drag = Vec3::Zero();                    // N s^2 / m^2, per axis
  Vec3 load_drag = Vec3::Zero();                   // N s^2 / m^2, per axis
  Vec3 rotational_drag = Vec3::Zero();             // N m s^2, per Euler rate
  double thrust_limit = 30.0;                      // bound on |F_ld|, N
  double rotor_min_thrust = 0.0;                   // N
  double rotor_max_thrust = 15.0;                  // N

  /// Throws std::invalid_argument on non-physical values.
  void validate() const;

  [[nodiscard]] double total_mass() const { return uav_mass + load_mass; }
  [[nodiscard]] Vec3 gravity_vector() const { return {0.0, 0.0, gravity}; }
  [[nodiscard]] Vec3 cable_vector() const { return {0.0, 0.0, cable_length}; }
};

struct GeneralizedState {
  Vec8 q = Vec8::Zero();
  Vec8 qdot = Vec8::Zero();

  [[nodiscard]] Vec3 xi_q() const { return q.segment<3>(0); }
  [[nodiscard]] EulerAngles eta() const { return EulerAngles::from(q.segment<3>(3)); }
  [[nodiscard]] SwingAngles sigma() const { return SwingAngles::from(q.segment<2>(6)); }
  [[nodiscard]] Vec3 xi_q_dot() const { return qdot.segment<3>(0); }
  [[nodiscard]] Vec3 eta_dot() const { return qdot.segment<3>(3); }
  [[nodiscard]] Vec2 sigma_dot() const { return qdot.segment<2>(6); }

  /// Throws DomainError when an angle bound is violated or an entry is not finite.
  void validate() const;
};

/// u = [F_l, tau_eta]; F_l is the signed thrust along z_b (negative lifts).
struct ControlInput {
  double thrust = 0.0;
  Vec3 torque = Vec3::Zero();

  [[nodiscard]] Vec4 vec() const { return {thrust, torque.x(), torque.y(), torque.z()}; }
};

struct DragSet {
  Vec3 uav = Vec3::Zero();       // D_xi_q, N
  Vec3 load = Vec3::Zero();      // D_xi_p, N
  Vec3 attitude = Vec3::Zero();  // D_eta, N m
  Vec2 swing = Vec2::Zero();     // D_sigma, N m

  /// F_d = [D_xi_q + D_xi_p; D_eta; D_sigma].
  [[nodiscard]] Vec8 generalized() const;
};

namespace dynamics {

/// Position of the suspension point xi = xi_q + R_b^i L.
Vec3 suspension_point(const Vec8& q, const Params& params);
/// Load position xi_p = xi_q + R_b^i L + R_p^i l.
Vec3 load_position(const Vec8& q, const Params& params);
/// 3x8 Jacobian of xi_p with respect to q.
Mat38 load_jacobian(const Vec8& q, const Params& params);
Vec3 load_velocity(const GeneralizedState& s, const Params& params);
Vec3 suspension_velocity(const GeneralizedState& s, const Params& params);

/// J_q = R_v^T I_q R_v.
Mat3 attitude_inertia(const EulerAngles& eta, const Params& params);
/// Christoffel matrix of J_q alone (the UAV's own Coriolis torque).
Mat3 attitude_coriolis(const EulerAngles& eta, const Vec3& eta_dot, const Params& params);

Mat8 mass_matrix(const Vec8& q, const Params& params);
/// dM/dq_i, i = 0..7 (entries 0..2 are zero).
std::array<Mat8, 8> mass_matrix_partials(const Vec8& q, const Params& params);
Mat8 coriolis_matrix(const Vec8& q, const Vec8& qdot, const Params& params);
Vec8 gravity_vector(const Vec8& q, const Params& params);
DragSet drag_forces(const Vec8& q, const Vec8& qdot, const Params& params);
Mat84 control_effectiveness(const Vec8& q);

/// All right- and left-hand terms of the equation of motion at one state.
struct PlantTerms {
  Mat8 mass;
  Vec8 coriolis_force;  // C(q, qd) qd
  Vec8 gravity;         // G(q)
  Vec8 actuation;       // B(q) u
  Vec8 drag;            // F_d(q, qd)

  [[nodiscard]] Vec8 rhs() const { return actuation + drag - coriolis_force - gravity; }
};

PlantTerms assemble_terms(const GeneralizedState& s, const ControlInput& u, const Params& params);

/// Solves M qdd = rhs by Cholesky with a residual check.
/// Throws SingularMatrixError if M is not positive definite.
Vec8 solve_accelerations(const PlantTerms& terms);

Vec8 forward_dynamics(const GeneralizedState& s, const ControlInput& u, const Params& params);

struct CableTension {
  Vec3 force;        // F_t, inertial frame, acting on the load
  double magnitude;  // signed scalar with F_t = R_p^i [0 0 magnitude]; negative when taut
};

/// F_t = R F_l - m_q xidd_q + m_q g + D_xi_q, using accelerations consistent with (s, u).
CableTension cable_tension(const GeneralizedState& s, const Vec8& qddot, const ControlInput& u,
                           const Params& params);

/// Blocks of the swing dynamics written about the suspension point:
///   sigma_dd = -M_sigma xi_dd - M_sigma1^{-1} (Ct_sigma qt_dot + G_sigma - D_sigma).
struct ReducedSwingTerms {
  Mat2 inertia;          // M_sigma1 = diag(m_77, m_88)
  Mat23 coupling;        // M_sigma2 = [m_71 m_72 m_73; m_81 0 m_83]
  Mat23 map;             // M_sigma = M_sigma1^{-1} M_sigma2
  Vec2 coriolis;         // Ct_sigma qt_dot
  Vec2 full_coriolis;    // C_sigma qd, rows 7-8 of C qd
  Vec2 gravity;          // G_sigma
  Vec2 drag;             // D_sigma
};

/// Throws SingularMatrixError when M_sigma1 is not invertible.
ReducedSwingTerms reduced_swing_terms(const GeneralizedState& s, const Params& params);

double kinetic_energy(const GeneralizedState& s, const Params& params);
double potential_energy(const Vec8& q, const Params& params);
double total_energy(const GeneralizedState& s, const Params& params);

}  // namespace dynamics
}  // namespace uosl

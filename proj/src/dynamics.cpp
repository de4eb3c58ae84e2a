#include "uosl/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace uosl {

void Params::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) {
      throw std::invalid_argument(std::string("invalid params: ") + what);
    }
  };
  require(uav_mass > 0.0, "uav_mass must be > 0");
  require(load_mass >= 0.0, "load_mass must be >= 0");
  require((uav_inertia.array() > 0.0).all(), "uav_inertia entries must be > 0");
  require(suspension_offset.allFinite(), "suspension_offset must be finite");
  require(cable_length > 0.0, "cable_length must be > 0");
  require(arm_length > 0.0, "arm_length must be > 0");
  require(rotor_torque_coeff > 0.0, "rotor_torque_coeff must be > 0");
  require(gravity >= 0.0, "gravity must be >= 0");
  require((uav_drag.array() >= 0.0).all() && (load_drag.array() >= 0.0).all() &&
              (rotational_drag.array() >= 0.0).all(),
          "drag coefficients must be >= 0");
  require(thrust_limit > 0.0, "thrust_limit must be > 0");
  require(rotor_min_thrust <= rotor_max_thrust, "rotor_min_thrust must be <= rotor_max_thrust");
}

void GeneralizedState::validate() const {
  if (!q.allFinite() || !qdot.allFinite()) {
    throw DomainError("state has non-finite entries");
  }
  spatial::check_attitude(eta());
  spatial::check_swing(sigma());
}

Vec8 DragSet::generalized() const {
  Vec8 f;
  f << uav + load, attitude, swing;
  return f;
}

namespace dynamics {
namespace {

// Everything position-dependent that M, dM/dq and the Jacobians share.
struct Kinematics {
  spatial::BodyRotationPartials body;
  spatial::LoadRotationPartials load;
  Mat3 rate_map;
  std::array<Mat3, 3> rate_map_partials;
  Mat38 jacobian;  // d xi_p / dq
};

Kinematics kinematics(const Vec8& q, const Params& params) {
  const auto eta = EulerAngles::from(q.segment<3>(3));
  const auto sigma = SwingAngles::from(q.segment<2>(6));
  Kinematics k{spatial::body_rotation_partials(eta), spatial::load_rotation_partials(sigma),
               spatial::euler_rate_map(eta), spatial::euler_rate_map_partials(eta),
               Mat38::Zero()};
  const Vec3 offset = params.suspension_offset;
  const Vec3 cable = params.cable_vector();
  k.jacobian.block<3, 3>(0, 0).setIdentity();
  for (int i = 0; i < 3; ++i) {
    k.jacobian.col(3 + i) = k.body.first[i] * offset;
  }
  for (int i = 0; i < 2; ++i) {
    k.jacobian.col(6 + i) = k.load.first[i] * cable;
  }
  return k;
}

Mat3 rotational_inertia(const Kinematics& k, const Params& params) {
  return k.rate_map.transpose() * params.uav_inertia.asDiagonal() * k.rate_map;
}

Mat3 rotational_inertia_partial(const Kinematics& k, const Params& params, int i) {
  const Mat3 half = k.rate_map_partials[i].transpose() * params.uav_inertia.asDiagonal() *
                    k.rate_map;
  return half + half.transpose();
}

Vec3 quadratic_drag(const Vec3& coeff, const Vec3& velocity) {
  return -(coeff.array() * velocity.array().abs() * velocity.array()).matrix();
}

}  // namespace

Vec3 suspension_point(const Vec8& q, const Params& params) {
  const auto eta = EulerAngles::from(q.segment<3>(3));
  return q.segment<3>(0) + spatial::rot_body_to_inertial(eta) * params.suspension_offset;
}

Vec3 load_position(const Vec8& q, const Params& params) {
  const auto sigma = SwingAngles::from(q.segment<2>(6));
  return suspension_point(q, params) + spatial::rot_load_to_inertial(sigma) * params.cable_vector();
}

Mat38 load_jacobian(const Vec8& q, const Params& params) { return kinematics(q, params).jacobian; }

Vec3 load_velocity(const GeneralizedState& s, const Params& params) {
  return load_jacobian(s.q, params) * s.qdot;
}

Vec3 suspension_velocity(const GeneralizedState& s, const Params& params) {
  const auto rates =
      spatial::body_rotation_derivatives(s.eta(), s.eta_dot(), Vec3::Zero());
  return s.xi_q_dot() + rates.first * params.suspension_offset;
}

Mat3 attitude_inertia(const EulerAngles& eta, const Params& params) {
  const Mat3 rv = spatial::euler_rate_map(eta);
  return rv.transpose() * params.uav_inertia.asDiagonal() * rv;
}

Mat3 attitude_coriolis(const EulerAngles& eta, const Vec3& eta_dot, const Params& params) {
  const Mat3 rv = spatial::euler_rate_map(eta);
  const auto drv = spatial::euler_rate_map_partials(eta);
  std::array<Mat3, 3> dj;
  Mat3 jdot = Mat3::Zero();
  for (int i = 0; i < 3; ++i) {
    const Mat3 half = drv[i].transpose() * params.uav_inertia.asDiagonal() * rv;
    dj[i] = half + half.transpose();
    jdot += dj[i] * eta_dot[i];
  }
  Mat3 a;
  for (int j = 0; j < 3; ++j) {
    a.col(j) = dj[j] * eta_dot;
  }
  return 0.5 * (jdot + a - a.transpose());
}

Mat8 mass_matrix(const Vec8& q, const Params& params) {
  const auto k = kinematics(q, params);
  Mat8 m = params.load_mass * k.jacobian.transpose() * k.jacobian;
  m.block<3, 3>(0, 0) += params.uav_mass * Mat3::Identity();
  m.block<3, 3>(3, 3) += rotational_inertia(k, params);
  return m;
}

std::array<Mat8, 8> mass_matrix_partials(const Vec8& q, const Params& params) {
  const auto k = kinematics(q, params);
  const Vec3 offset = params.suspension_offset;
  const Vec3 cable = params.cable_vector();
  std::array<Mat8, 8> dm;
  for (int i = 0; i < 3; ++i) {
    dm[i].setZero();
  }
  for (int a = 0; a < 3; ++a) {
    Mat38 dj = Mat38::Zero();
    for (int b = 0; b < 3; ++b) {
      dj.col(3 + b) = k.body.second[a][b] * offset;
    }
    const Mat8 half = params.load_mass * dj.transpose() * k.jacobian;
    dm[3 + a] = half + half.transpose();
    dm[3 + a].block<3, 3>(3, 3) += rotational_inertia_partial(k, params, a);
  }
  for (int a = 0; a < 2; ++a) {
    Mat38 dj = Mat38::Zero();
    for (int b = 0; b < 2; ++b) {
      dj.col(6 + b) = k.load.second[a][b] * cable;
    }
    const Mat8 half = params.load_mass * dj.transpose() * k.jacobian;
    dm[6 + a] = half + half.transpose();
  }
  return dm;
}

Mat8 coriolis_matrix(const Vec8& q, const Vec8& qdot, const Params& params) {
  // c_kj = 1/2 sum_i (dm_kj/dq_i + dm_ki/dq_j - dm_ij/dq_k) qd_i
  const auto dm = mass_matrix_partials(q, params);
  Mat8 mdot = Mat8::Zero();
  Mat8 a;
  for (int i = 0; i < 8; ++i) {
    mdot += dm[i] * qdot[i];
    a.col(i) = dm[i] * qdot;
  }
  return 0.5 * (mdot + a - a.transpose());
}

Vec8 gravity_vector(const Vec8& q, const Params& params) {
  const auto eta = EulerAngles::from(q.segment<3>(3));
  const auto sigma = SwingAngles::from(q.segment<2>(6));
  spatial::check_attitude(eta);
  spatial::check_swing(sigma);
  const double mg = params.load_mass * params.gravity;
  const double cph = std::cos(eta.phi), sph = std::sin(eta.phi);
  const double cth = std::cos(eta.theta), sth = std::sin(eta.theta);
  const double ca = std::cos(sigma.alpha), sa = std::sin(sigma.alpha);
  const double cb = std::cos(sigma.beta), sb = std::sin(sigma.beta);
  const Vec3& off = params.suspension_offset;
  const double l = params.cable_length;
  Vec8 g;
  g << 0.0, 0.0, -params.total_mass() * params.gravity,
      -mg * cth * (cph * off.y() - sph * off.z()),
      mg * (cth * off.x() + sth * (sph * off.y() + cph * off.z())),
      0.0,
      mg * sa * cb * l,
      mg * ca * sb * l;
  return g;
}

DragSet drag_forces(const Vec8& q, const Vec8& qdot, const Params& params) {
  const auto k = kinematics(q, params);
  DragSet d;
  d.uav = quadratic_drag(params.uav_drag, qdot.segment<3>(0));
  d.load = quadratic_drag(params.load_drag, k.jacobian * qdot);
  d.attitude = quadratic_drag(params.rotational_drag, qdot.segment<3>(3));
  // D_sigma = [I2 0] (l x R_i^p D_xi_p)
  const Vec3 moment = params.cable_vector().cross(k.load.value.transpose() * d.load);
  d.swing = moment.head<2>();
  return d;
}

Mat84 control_effectiveness(const Vec8& q) {
  const Mat3 r = spatial::rot_body_to_inertial(EulerAngles::from(q.segment<3>(3)));
  Mat84 b = Mat84::Zero();
  b.block<3, 1>(0, 0) = r.col(2);
  b.block<3, 3>(3, 1).setIdentity();
  return b;
}

PlantTerms assemble_terms(const GeneralizedState& s, const ControlInput& u,
                          const Params& params) {
  s.validate();
  PlantTerms t;
  t.mass = mass_matrix(s.q, params);
  t.coriolis_force = coriolis_matrix(s.q, s.qdot, params) * s.qdot;
  t.gravity = gravity_vector(s.q, params);
  t.actuation = control_effectiveness(s.q) * u.vec();
  t.drag = drag_forces(s.q, s.qdot, params).generalized();
  return t;
}

Vec8 solve_accelerations(const PlantTerms& terms) {
  const Vec8 rhs = terms.rhs();
  const Eigen::LLT<Mat8> llt(terms.mass);
  if (llt.info() != Eigen::Success) {
    throw SingularMatrixError("mass matrix is not positive definite");
  }
  Vec8 qdd = llt.solve(rhs);
  const double residual = (terms.mass * qdd - rhs).norm();
  if (!qdd.allFinite() || residual > 1e-9 * rhs.norm()) {
    throw SingularMatrixError("mass matrix solve residual too large: " +
                              std::to_string(residual));
  }
  return qdd;
}

Vec8 forward_dynamics(const GeneralizedState& s, const ControlInput& u, const Params& params) {
  const PlantTerms terms = assemble_terms(s, u, params);
  if (params.load_mass > 0.0) {
    return solve_accelerations(terms);
  }
  // massless load: the swing rows are identically zero, so only the UAV block
  // is solved and the swing coordinates are carried along unaccelerated
  const Vec8 rhs = terms.rhs();
  const Mat6 m = terms.mass.topLeftCorner<6, 6>();
  const Eigen::LLT<Mat6> llt(m);
  if (llt.info() != Eigen::Success) {
    throw SingularMatrixError("UAV mass block is not positive definite");
  }
  Vec8 qdd = Vec8::Zero();
  qdd.head<6>() = llt.solve(rhs.head<6>());
  return qdd;
}

CableTension cable_tension(const GeneralizedState& s, const Vec8& qddot, const ControlInput& u,
                           const Params& params) {
  const auto eta = s.eta();
  const Mat3 rb = spatial::rot_body_to_inertial(eta);
  const Mat3 rp = spatial::rot_load_to_inertial(s.sigma());
  const Vec3 drag_uav = quadratic_drag(params.uav_drag, s.xi_q_dot());
  const Vec3 force = rb.col(2) * u.thrust - params.uav_mass * qddot.segment<3>(0) +
                     params.uav_mass * params.gravity_vector() + drag_uav;
  return {force, rp.col(2).dot(force)};
}

ReducedSwingTerms reduced_swing_terms(const GeneralizedState& s, const Params& params) {
  s.validate();
  const Mat8 m = mass_matrix(s.q, params);
  const Mat8 c = coriolis_matrix(s.q, s.qdot, params);
  ReducedSwingTerms r;
  r.inertia = Mat2::Zero();
  r.inertia(0, 0) = m(6, 6);
  r.inertia(1, 1) = m(7, 7);
  if (!(r.inertia(0, 0) > 0.0) || !(r.inertia(1, 1) > 0.0)) {
    throw SingularMatrixError("swing inertia M_sigma1 is singular");
  }
  r.coupling = m.block<2, 3>(6, 0);
  r.map.row(0) = r.coupling.row(0) / r.inertia(0, 0);
  r.map.row(1) = r.coupling.row(1) / r.inertia(1, 1);
  // Ct_sigma = C_sigma diag(I3, 0, I2) applied to qt_dot = [xi_dot; eta_dot; sigma_dot]
  const Vec3 xi_dot = suspension_velocity(s, params);
  r.coriolis = c.block<2, 3>(6, 0) * xi_dot + c.block<2, 2>(6, 6) * s.sigma_dot();
  r.full_coriolis = (c * s.qdot).segment<2>(6);
  r.gravity = gravity_vector(s.q, params).segment<2>(6);
  r.drag = drag_forces(s.q, s.qdot, params).swing;
  return r;
}

double kinetic_energy(const GeneralizedState& s, const Params& params) {
  return 0.5 * s.qdot.dot(mass_matrix(s.q, params) * s.qdot);
}

double potential_energy(const Vec8& q, const Params& params) {
  return -params.uav_mass * params.gravity * q[2] -
         params.load_mass * params.gravity * load_position(q, params).z();
}

double total_energy(const GeneralizedState& s, const Params& params) {
  return kinetic_energy(s, params) + potential_energy(s.q, params);
}

}  // namespace dynamics
}  // namespace uosl

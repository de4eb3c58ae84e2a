#pragma once

// Test-side kinematics written from scratch: elementary rotations, positions,
// and energies by finite differences. Nothing here calls the library model.

#include <cmath>
#include <random>

#include "uosl/dynamics.hpp"

namespace support {

using namespace uosl;

inline Mat3 rx(double a) {
  Mat3 r;
  r << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return r;
}
inline Mat3 ry(double a) {
  Mat3 r;
  r << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return r;
}
inline Mat3 rz(double a) {
  Mat3 r;
  r << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return r;
}

inline Mat3 body(const Vec8& q) { return rz(q[5]) * ry(q[4]) * rx(q[3]); }
inline Mat3 load(const Vec8& q) { return ry(q[7]) * rx(q[6]); }

inline Vec3 load_pos(const Vec8& q, const Params& p) {
  return q.head<3>() + body(q) * p.suspension_offset + load(q) * p.cable_vector();
}

/// Kinetic energy from body angular velocity (R^T R_dot) and load velocity,
/// both by central differences along q + t qd.
inline double kinetic(const Vec8& q, const Vec8& qd, const Params& p) {
  const double h = 1e-6;
  const Mat3 rdot = (body(q + h * qd) - body(q - h * qd)) / (2 * h);
  const Mat3 w = body(q).transpose() * rdot;
  const Vec3 omega(w(2, 1), w(0, 2), w(1, 0));
  const Vec3 vp = (load_pos(q + h * qd, p) - load_pos(q - h * qd, p)) / (2 * h);
  const Vec3 vq = qd.head<3>();
  return 0.5 * p.uav_mass * vq.squaredNorm() +
         0.5 * omega.dot(p.uav_inertia.asDiagonal() * omega) + 0.5 * p.load_mass * vp.squaredNorm();
}

/// NED: z points down, so height is -z.
inline double potential(const Vec8& q, const Params& p) {
  return -p.gravity * (p.uav_mass * q[2] + p.load_mass * load_pos(q, p).z());
}

inline GeneralizedState random_state(std::mt19937_64& rng, double angle = 1.2, double rate = 2.0) {
  std::uniform_real_distribution<double> a(-angle, angle), r(-rate, rate), x(-5, 5);
  GeneralizedState s;
  for (int i = 0; i < 3; ++i) s.q[i] = x(rng);
  for (int i = 3; i < 8; ++i) s.q[i] = a(rng);
  s.q[5] = 3 * a(rng);
  for (int i = 0; i < 8; ++i) s.qdot[i] = r(rng);
  return s;
}

}  // namespace support

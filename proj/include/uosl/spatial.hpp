#pragma once

// Rotation matrices of the UAV body and the slung load, the Euler-rate map,
// and their closed-form partial derivatives.
//
// Conventions: NED inertial frame. The body rotation is ZYX
// (R = Rz(psi) Ry(theta) Rx(phi)); the load rotation is R = Ry(beta) Rx(alpha).

#include <array>

#include "uosl/types.hpp"

namespace uosl::spatial {

/// Throws DomainError unless |phi|, |theta| < pi/2.
void check_attitude(const EulerAngles& eta);
/// Throws DomainError unless |alpha|, |beta| < pi/2.
void check_swing(const SwingAngles& sigma);

Mat3 skew(const Vec3& v);

/// R_b^i, body to inertial.
Mat3 rot_body_to_inertial(const EulerAngles& eta);

/// R_p^i, load to inertial.
Mat3 rot_load_to_inertial(const SwingAngles& sigma);

/// R_v, maps Euler rates to body angular velocity: omega_b = R_v * eta_dot.
/// det(R_v) = cos(theta). Throws DomainError for |theta| >= pi/2.
Mat3 euler_rate_map(const EulerAngles& eta);

/// d R_v / d eta_i for i = phi, theta, psi.
std::array<Mat3, 3> euler_rate_map_partials(const EulerAngles& eta);

/// First and second partials of R_b^i with respect to (phi, theta, psi).
struct BodyRotationPartials {
  Mat3 value;
  std::array<Mat3, 3> first;
  std::array<std::array<Mat3, 3>, 3> second;  // symmetric in the indices
};
BodyRotationPartials body_rotation_partials(const EulerAngles& eta);

/// First and second partials of R_p^i with respect to (alpha, beta).
struct LoadRotationPartials {
  Mat3 value;
  std::array<Mat3, 2> first;
  std::array<std::array<Mat3, 2>, 2> second;
};
LoadRotationPartials load_rotation_partials(const SwingAngles& sigma);

/// Time derivatives of a rotation along a trajectory.
struct RotationRates {
  Mat3 first;   // R dot
  Mat3 second;  // R double dot
};

RotationRates body_rotation_derivatives(const EulerAngles& eta, const Vec3& eta_dot,
                                        const Vec3& eta_ddot);

RotationRates load_rotation_derivatives(const SwingAngles& sigma, const Vec2& sigma_dot,
                                        const Vec2& sigma_ddot);

}  // namespace uosl::spatial

#include "uosl/spatial.hpp"

#include <cmath>
#include <string>

namespace uosl {

double wrap_angle(double angle) {
  double wrapped = std::remainder(angle, 2.0 * kPi);
  if (wrapped <= -kPi) {
    wrapped += 2.0 * kPi;
  }
  return wrapped;
}

}  // namespace uosl

namespace uosl::spatial {
namespace {

enum class Axis { x, y, z };

// k-th derivatives of cos and sin at angle a.
struct TrigDerivative {
  double c;
  double s;
};

TrigDerivative trig_derivative(double a, int order) {
  const double c = std::cos(a);
  const double s = std::sin(a);
  switch (order % 4) {
    case 0:
      return {c, s};
    case 1:
      return {-s, c};
    case 2:
      return {-c, -s};
    default:
      return {s, -c};
  }
}

// d^order/da^order of the elementary rotation about `axis`.
Mat3 elementary(Axis axis, double a, int order) {
  const auto [c, s] = trig_derivative(a, order);
  const double one = order == 0 ? 1.0 : 0.0;
  Mat3 r;
  switch (axis) {
    case Axis::x:
      r << one, 0, 0,
           0, c, -s,
           0, s, c;
      break;
    case Axis::y:
      r << c, 0, s,
           0, one, 0,
           -s, 0, c;
      break;
    case Axis::z:
      r << c, -s, 0,
           s, c, 0,
           0, 0, one;
      break;
  }
  return r;
}

// Partial of R_b^i with derivative orders (k_phi, k_theta, k_psi).
Mat3 body_partial(const EulerAngles& eta, int k_phi, int k_theta, int k_psi) {
  return elementary(Axis::z, eta.psi, k_psi) * elementary(Axis::y, eta.theta, k_theta) *
         elementary(Axis::x, eta.phi, k_phi);
}

Mat3 load_partial(const SwingAngles& sigma, int k_alpha, int k_beta) {
  return elementary(Axis::y, sigma.beta, k_beta) * elementary(Axis::x, sigma.alpha, k_alpha);
}

bool in_open_half_range(double angle) { return std::isfinite(angle) && std::abs(angle) < kHalfPi; }

}  // namespace

void check_attitude(const EulerAngles& eta) {
  if (!in_open_half_range(eta.phi) || !in_open_half_range(eta.theta) ||
      !std::isfinite(eta.psi)) {
    throw DomainError("attitude out of bounds: phi=" + std::to_string(eta.phi) +
                      " theta=" + std::to_string(eta.theta));
  }
}

void check_swing(const SwingAngles& sigma) {
  if (!in_open_half_range(sigma.alpha) || !in_open_half_range(sigma.beta)) {
    throw DomainError("swing angle out of bounds: alpha=" + std::to_string(sigma.alpha) +
                      " beta=" + std::to_string(sigma.beta));
  }
}

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0, -v.z(), v.y(),
       v.z(), 0, -v.x(),
       -v.y(), v.x(), 0;
  return s;
}

Mat3 rot_body_to_inertial(const EulerAngles& eta) {
  check_attitude(eta);
  const double cph = std::cos(eta.phi), sph = std::sin(eta.phi);
  const double cth = std::cos(eta.theta), sth = std::sin(eta.theta);
  const double cps = std::cos(eta.psi), sps = std::sin(eta.psi);
  Mat3 r;
  r << cth * cps, sph * sth * cps - cph * sps, cph * sth * cps + sph * sps,
       cth * sps, sph * sth * sps + cph * cps, cph * sth * sps - sph * cps,
       -sth, sph * cth, cph * cth;
  return r;
}

Mat3 rot_load_to_inertial(const SwingAngles& sigma) {
  check_swing(sigma);
  const double ca = std::cos(sigma.alpha), sa = std::sin(sigma.alpha);
  const double cb = std::cos(sigma.beta), sb = std::sin(sigma.beta);
  Mat3 r;
  r << cb, sa * sb, ca * sb,
       0, ca, -sa,
       -sb, sa * cb, ca * cb;
  return r;
}

Mat3 euler_rate_map(const EulerAngles& eta) {
  check_attitude(eta);
  const double cph = std::cos(eta.phi), sph = std::sin(eta.phi);
  const double cth = std::cos(eta.theta), sth = std::sin(eta.theta);
  Mat3 rv;
  rv << 1, 0, -sth,
        0, cph, sph * cth,
        0, -sph, cph * cth;
  return rv;
}

std::array<Mat3, 3> euler_rate_map_partials(const EulerAngles& eta) {
  check_attitude(eta);
  const double cph = std::cos(eta.phi), sph = std::sin(eta.phi);
  const double cth = std::cos(eta.theta), sth = std::sin(eta.theta);
  std::array<Mat3, 3> d;
  d[0] << 0, 0, 0,
          0, -sph, cph * cth,
          0, -cph, -sph * cth;
  d[1] << 0, 0, -cth,
          0, 0, -sph * sth,
          0, 0, -cph * sth;
  d[2].setZero();
  return d;
}

BodyRotationPartials body_rotation_partials(const EulerAngles& eta) {
  check_attitude(eta);
  BodyRotationPartials p;
  p.value = body_partial(eta, 0, 0, 0);
  for (int i = 0; i < 3; ++i) {
    std::array<int, 3> k{0, 0, 0};
    ++k[i];
    p.first[i] = body_partial(eta, k[0], k[1], k[2]);
    for (int j = 0; j <= i; ++j) {
      std::array<int, 3> kk = k;
      ++kk[j];
      p.second[i][j] = body_partial(eta, kk[0], kk[1], kk[2]);
      p.second[j][i] = p.second[i][j];
    }
  }
  return p;
}

LoadRotationPartials load_rotation_partials(const SwingAngles& sigma) {
  check_swing(sigma);
  LoadRotationPartials p;
  p.value = load_partial(sigma, 0, 0);
  p.first[0] = load_partial(sigma, 1, 0);
  p.first[1] = load_partial(sigma, 0, 1);
  p.second[0][0] = load_partial(sigma, 2, 0);
  p.second[1][1] = load_partial(sigma, 0, 2);
  p.second[0][1] = load_partial(sigma, 1, 1);
  p.second[1][0] = p.second[0][1];
  return p;
}

RotationRates body_rotation_derivatives(const EulerAngles& eta, const Vec3& eta_dot,
                                        const Vec3& eta_ddot) {
  const auto p = body_rotation_partials(eta);
  RotationRates r{Mat3::Zero(), Mat3::Zero()};
  for (int i = 0; i < 3; ++i) {
    r.first += p.first[i] * eta_dot[i];
    r.second += p.first[i] * eta_ddot[i];
    for (int j = 0; j < 3; ++j) {
      r.second += p.second[i][j] * (eta_dot[i] * eta_dot[j]);
    }
  }
  return r;
}

RotationRates load_rotation_derivatives(const SwingAngles& sigma, const Vec2& sigma_dot,
                                        const Vec2& sigma_ddot) {
  const auto p = load_rotation_partials(sigma);
  RotationRates r{Mat3::Zero(), Mat3::Zero()};
  for (int i = 0; i < 2; ++i) {
    r.first += p.first[i] * sigma_dot[i];
    r.second += p.first[i] * sigma_ddot[i];
    for (int j = 0; j < 2; ++j) {
      r.second += p.second[i][j] * (sigma_dot[i] * sigma_dot[j]);
    }
  }
  return r;
}

}  // namespace uosl::spatial

#include "uosl/oracle.hpp"

#include <cmath>
#include <complex>

namespace uosl::oracle {
namespace {

using cplx = std::complex<double>;
constexpr double kStep = 1e-20;  // complex step

template <typename T>
using M3 = Eigen::Matrix<T, 3, 3>;
template <typename T>
using V3 = Eigen::Matrix<T, 3, 1>;

template <typename T>
M3<T> about_x(T a) {
  using std::cos, std::sin;
  M3<T> r;
  r << T(1), T(0), T(0), T(0), cos(a), -sin(a), T(0), sin(a), cos(a);
  return r;
}

template <typename T>
M3<T> about_y(T a) {
  using std::cos, std::sin;
  M3<T> r;
  r << cos(a), T(0), sin(a), T(0), T(1), T(0), -sin(a), T(0), cos(a);
  return r;
}

template <typename T>
M3<T> about_z(T a) {
  using std::cos, std::sin;
  M3<T> r;
  r << cos(a), -sin(a), T(0), sin(a), cos(a), T(0), T(0), T(0), T(1);
  return r;
}

template <typename T>
M3<T> body_rotation(const Eigen::Matrix<T, 8, 1>& q) {
  return about_z(q[5]) * about_y(q[4]) * about_x(q[3]);
}

template <typename T>
V3<T> load_point(const Eigen::Matrix<T, 8, 1>& q, const Params& p) {
  const V3<T> offset = p.suspension_offset.cast<T>();
  const V3<T> cable(T(0), T(0), T(p.cable_length));
  return q.template head<3>() + body_rotation(q) * offset + about_y(q[7]) * about_x(q[6]) * cable;
}

Eigen::Matrix<cplx, 8, 1> perturbed(const Vec8& q, const Vec8& dir) {
  Eigen::Matrix<cplx, 8, 1> z;
  for (int i = 0; i < 8; ++i) {
    z[i] = cplx(q[i], kStep * dir[i]);
  }
  return z;
}

}  // namespace

double kinetic_energy(const Vec8& q, const Vec8& qdot, const Params& params) {
  const auto z = perturbed(q, qdot);
  const Vec3 load_vel = load_point(z, params).imag() / kStep;
  const Mat3 rb = body_rotation(q);
  const Mat3 rb_dot = body_rotation(z).imag() / kStep;
  const Mat3 w = rb.transpose() * rb_dot;  // skew(omega_body)
  const Vec3 omega(w(2, 1), w(0, 2), w(1, 0));
  return 0.5 * params.uav_mass * qdot.head<3>().squaredNorm() +
         0.5 * omega.dot(params.uav_inertia.asDiagonal() * omega) +
         0.5 * params.load_mass * load_vel.squaredNorm();
}

double potential_energy(const Vec8& q, const Params& params) {
  // NED: height is -z
  return -params.uav_mass * params.gravity * q[2] -
         params.load_mass * params.gravity * load_point(q, params).z();
}

Mat8 mass_matrix(const Vec8& q, const Params& params) {
  Mat8 m;
  Vec8 t_single;
  for (int i = 0; i < 8; ++i) {
    t_single[i] = kinetic_energy(q, Vec8::Unit(i), params);
  }
  for (int i = 0; i < 8; ++i) {
    m(i, i) = 2.0 * t_single[i];
    for (int j = i + 1; j < 8; ++j) {
      const double tij = kinetic_energy(q, Vec8::Unit(i) + Vec8::Unit(j), params);
      m(i, j) = m(j, i) = tij - t_single[i] - t_single[j];
    }
  }
  return m;
}

Vec8 gravity_vector(const Vec8& q, const Params& params) {
  Vec8 g;
  for (int k = 0; k < 8; ++k) {
    const auto z = perturbed(q, Vec8::Unit(k));
    const cplx v = -params.uav_mass * params.gravity * z[2] -
                   params.load_mass * params.gravity * load_point(z, params).z();
    g[k] = v.imag() / kStep;
  }
  return g;
}

std::array<Mat8, 8> mass_matrix_partials(const Vec8& q, const Params& params, double h) {
  std::array<Mat8, 8> d;
  for (int k = 0; k < 8; ++k) {
    const Vec8 e = Vec8::Unit(k) * h;
    d[k] = (mass_matrix(q + e, params) - mass_matrix(q - e, params)) / (2.0 * h);
  }
  return d;
}

Mat8 coriolis_matrix(const Vec8& q, const Vec8& qdot, const Params& params) {
  const auto dm = mass_matrix_partials(q, params);
  Mat8 c = Mat8::Zero();
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      double acc = 0.0;
      for (int k = 0; k < 8; ++k) {
        acc += 0.5 * (dm[k](i, j) + dm[j](i, k) - dm[i](j, k)) * qdot[k];
      }
      c(i, j) = acc;
    }
  }
  return c;
}

}  // namespace uosl::oracle

#include <doctest.h>

#include <cmath>
#include <random>

#include "uosl/spatial.hpp"

using namespace uosl;
using namespace uosl::spatial;

namespace {

// elementary rotations, written out independently of the library
Mat3 rx(double a) {
  Mat3 r;
  r << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return r;
}
Mat3 ry(double a) {
  Mat3 r;
  r << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return r;
}
Mat3 rz(double a) {
  Mat3 r;
  r << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return r;
}

EulerAngles along(double t) { return {0.3 * std::sin(1.1 * t), 0.2 * std::cos(0.7 * t), 0.5 * t}; }
Vec3 along_rate(double t) {
  return {0.33 * std::cos(1.1 * t), -0.14 * std::sin(0.7 * t), 0.5};
}
Vec3 along_accel(double t) {
  return {-0.363 * std::sin(1.1 * t), -0.098 * std::cos(0.7 * t), 0.0};
}

}  // namespace

TEST_CASE("body rotation") {
  CHECK(rot_body_to_inertial({}).isApprox(Mat3::Identity()));

  Mat3 yaw;
  yaw << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  CHECK((rot_body_to_inertial({0, 0, kHalfPi}) - yaw).cwiseAbs().maxCoeff() < 1e-15);

  const Mat3 r = rot_body_to_inertial({0.1, 0.2, 0.3});
  CHECK((r - rz(0.3) * ry(0.2) * rx(0.1)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("load rotation") {
  CHECK(rot_load_to_inertial({}).isApprox(Mat3::Identity()));
  const Mat3 r = rot_load_to_inertial({0, kPi / 6});
  CHECK(r(0, 0) == doctest::Approx(std::cos(kPi / 6)));
  CHECK(r(1, 0) == doctest::Approx(0.0));
  CHECK(r(2, 0) == doctest::Approx(-0.5));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int i = 0; i < 100; ++i) {
    const SwingAngles s{u(rng), u(rng)};
    const Mat3 m = rot_load_to_inertial(s);
    CHECK((m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((m - ry(s.beta) * rx(s.alpha)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("euler rate map") {
  CHECK(euler_rate_map({0, 0, 1.2}).isApprox(Mat3::Identity()));
  CHECK(euler_rate_map({0.4, kPi / 3, -0.7}).determinant() == doctest::Approx(0.5));
  const Mat3 near = euler_rate_map({0.1, kHalfPi - 1e-9, 0.0});
  CHECK(near.allFinite());
  CHECK_THROWS_AS(euler_rate_map({0, kHalfPi, 0}), DomainError);

  // omega_b = R^T R_dot, unskewed, must equal R_v eta_dot
  const double t = 0.8;
  const double h = 1e-6;
  const Mat3 rdot =
      (rot_body_to_inertial(along(t + h)) - rot_body_to_inertial(along(t - h))) / (2 * h);
  const Mat3 w = rot_body_to_inertial(along(t)).transpose() * rdot;
  const Vec3 omega(w(2, 1), w(0, 2), w(1, 0));
  CHECK((omega - euler_rate_map(along(t)) * along_rate(t)).norm() < 1e-8);
}

TEST_CASE("rate map partials match finite differences") {
  const EulerAngles e{0.3, -0.4, 1.0};
  const auto d = euler_rate_map_partials(e);
  const double h = 1e-6;
  for (int i = 0; i < 3; ++i) {
    Vec3 p = e.vec(), m = e.vec();
    p[i] += h;
    m[i] -= h;
    const Mat3 fd = (euler_rate_map(EulerAngles::from(p)) - euler_rate_map(EulerAngles::from(m))) / (2 * h);
    CHECK((fd - d[i]).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("rotation partials match finite differences") {
  const EulerAngles e{0.2, 0.5, -0.9};
  const auto p = body_rotation_partials(e);
  CHECK((p.value - rot_body_to_inertial(e)).cwiseAbs().maxCoeff() < 1e-15);
  const double h = 1e-5;
  for (int i = 0; i < 3; ++i) {
    Vec3 a = e.vec(), b = e.vec();
    a[i] += h;
    b[i] -= h;
    const auto pa = body_rotation_partials(EulerAngles::from(a));
    const auto pb = body_rotation_partials(EulerAngles::from(b));
    CHECK(((rot_body_to_inertial(EulerAngles::from(a)) - rot_body_to_inertial(EulerAngles::from(b))) / (2 * h) - p.first[i])
              .cwiseAbs()
              .maxCoeff() < 1e-9);
    for (int j = 0; j < 3; ++j) {
      CHECK(((pa.first[j] - pb.first[j]) / (2 * h) - p.second[i][j]).cwiseAbs().maxCoeff() < 1e-8);
    }
  }

  const SwingAngles s{-0.6, 0.25};
  const auto l = load_rotation_partials(s);
  for (int i = 0; i < 2; ++i) {
    Vec2 a = s.vec(), b = s.vec();
    a[i] += h;
    b[i] -= h;
    const auto la = load_rotation_partials(SwingAngles::from(a));
    const auto lb = load_rotation_partials(SwingAngles::from(b));
    CHECK(((la.value - lb.value) / (2 * h) - l.first[i]).cwiseAbs().maxCoeff() < 1e-9);
    for (int j = 0; j < 2; ++j) {
      CHECK(((la.first[j] - lb.first[j]) / (2 * h) - l.second[i][j]).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("body rotation derivatives") {
  const auto still = body_rotation_derivatives({0.1, 0.2, 0.3}, Vec3::Zero(), Vec3::Zero());
  CHECK(still.first.isZero(0.0));
  CHECK(still.second.isZero(0.0));

  const double w = 0.7;
  const auto yaw = body_rotation_derivatives({}, Vec3(0, 0, w), Vec3::Zero());
  Mat3 expected;
  expected << 0, -w, 0, w, 0, 0, 0, 0, 0;
  CHECK((yaw.first - expected).cwiseAbs().maxCoeff() < 1e-15);

  const double h = 1e-5;
  for (double t : {0.0, 0.9, 2.3}) {
    const auto d = body_rotation_derivatives(along(t), along_rate(t), along_accel(t));
    const Mat3 rp = rot_body_to_inertial(along(t + h));
    const Mat3 r0 = rot_body_to_inertial(along(t));
    const Mat3 rm = rot_body_to_inertial(along(t - h));
    CHECK(((rp - rm) / (2 * h) - d.first).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(((rp - 2 * r0 + rm) / (h * h) - d.second).cwiseAbs().maxCoeff() < 1e-4);
  }
}

TEST_CASE("load rotation derivatives") {
  auto sig = [](double t) { return SwingAngles{0.4 * std::sin(2 * t), -0.3 * std::cos(t)}; };
  const double t = 0.6;
  const Vec2 rate(0.8 * std::cos(2 * t), 0.3 * std::sin(t));
  const Vec2 accel(-1.6 * std::sin(2 * t), 0.3 * std::cos(t));
  const auto d = load_rotation_derivatives(sig(t), rate, accel);
  const double h = 1e-5;
  const Mat3 rp = rot_load_to_inertial(sig(t + h));
  const Mat3 r0 = rot_load_to_inertial(sig(t));
  const Mat3 rm = rot_load_to_inertial(sig(t - h));
  CHECK(((rp - rm) / (2 * h) - d.first).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(((rp - 2 * r0 + rm) / (h * h) - d.second).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("angle guards and wrapping") {
  CHECK_NOTHROW(check_attitude({1.5, -1.5, 100.0}));
  CHECK_THROWS_AS(check_attitude({kHalfPi, 0, 0}), DomainError);
  CHECK_THROWS_AS(check_swing({0, -kHalfPi}), DomainError);
  CHECK(wrap_angle(3 * kPi / 2) == doctest::Approx(-kHalfPi));
  CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
  CHECK(skew(Vec3(1, 2, 3)) * Vec3(4, 5, 6) == Vec3(1, 2, 3).cross(Vec3(4, 5, 6)));
}

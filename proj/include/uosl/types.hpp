#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace uosl {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat8 = Eigen::Matrix<double, 8, 8>;
using Mat23 = Eigen::Matrix<double, 2, 3>;
using Mat38 = Eigen::Matrix<double, 3, 8>;
using Mat84 = Eigen::Matrix<double, 8, 4>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kHalfPi = kPi / 2.0;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

/// UAV attitude, ZYX Euler angles in radians.
struct EulerAngles {
  double phi = 0.0;
  double theta = 0.0;
  double psi = 0.0;

  static EulerAngles from(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
  [[nodiscard]] Vec3 vec() const { return {phi, theta, psi}; }
};

/// Load swing angles (roll alpha, pitch beta) in radians.
struct SwingAngles {
  double alpha = 0.0;
  double beta = 0.0;

  static SwingAngles from(const Vec2& v) { return {v.x(), v.y()}; }
  [[nodiscard]] Vec2 vec() const { return {alpha, beta}; }
};

// Error hierarchy. Everything derives from std::runtime_error or
// std::domain_error so callers can catch broadly.

/// An angle left the model's validity region (|phi|, |theta|, |alpha|, |beta| < pi/2).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A matrix factorization or inversion failed.
class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An input is outside the operating regime a closed form assumes
/// (e.g. a desired tension with non-negative vertical component).
class RegimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace uosl

// core.hpp - shared constants, angle helpers, quaternion <-> DCM conversions.
//
// Frames: N is the heliocentric inertial frame (J2000 ecliptic axes), C is the
// camera frame (+z boresight, +x along image columns, +y along image rows).
// Attitude matrices map N -> C; quaternions are scalar-first (q0, qv).
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

namespace navsim {

using Eigen::Matrix2d;
using Eigen::Matrix3d;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::Vector3d;
using Eigen::VectorXd;

namespace constants {
inline constexpr double kAuKm = 1.495978707e8;          // km
inline constexpr double kSpeedOfLightKmS = 299792.458;  // km/s
inline constexpr double kMuSun = 1.32712440018e11;      // km^3/s^2
inline constexpr double kSunRadiusKm = 6.957e5;
inline constexpr double kSolarPowerW = 3.846e26;        // total radiated power
inline constexpr double kJ2000Jd = 2451545.0;
inline constexpr double kSecondsPerDay = 86400.0;
inline constexpr double kArcsec = M_PI / (180.0 * 3600.0);  // rad
}  // namespace constants

inline double deg2rad(double d) { return d * M_PI / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / M_PI; }
inline double arcsec2rad(double a) { return a * constants::kArcsec; }
inline double rad2arcsec(double r) { return r / constants::kArcsec; }

// Seconds TDB past J2000 from a Julian date.
inline double jd_to_tdb_sec(double jd) {
  return (jd - constants::kJ2000Jd) * constants::kSecondsPerDay;
}

inline Matrix3d skew(const Vector3d& v) {
  Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

// Scalar-first unit quaternion representing the rotation N -> C.
struct Quat {
  double q0 = 1.0;
  Vector3d qv = Vector3d::Zero();

  double norm() const { return std::sqrt(q0 * q0 + qv.squaredNorm()); }

  Quat normalized() const {
    const double n = norm();
    return Quat{q0 / n, qv / n};
  }

  // A = (q0^2 - qv.qv) I + 2 qv qv^T - 2 q0 [qv]x
  Matrix3d to_dcm() const {
    return (q0 * q0 - qv.squaredNorm()) * Matrix3d::Identity() +
           2.0 * qv * qv.transpose() - 2.0 * q0 * skew(qv);
  }

  Quat conjugate() const { return Quat{q0, -qv}; }
};

inline Quat quat_multiply(const Quat& a, const Quat& b) {
  Quat r;
  r.q0 = a.q0 * b.q0 - a.qv.dot(b.qv);
  r.qv = a.q0 * b.qv + b.q0 * a.qv - a.qv.cross(b.qv);
  return r;
}

// Shepperd's method; inverse of Quat::to_dcm.
inline Quat dcm_to_quat(const Matrix3d& a) {
  const double tr = a.trace();
  double q[4];  // q0, q1, q2, q3
  if (tr >= a(0, 0) && tr >= a(1, 1) && tr >= a(2, 2)) {
    q[0] = 0.5 * std::sqrt(std::max(0.0, 1.0 + tr));
    const double s = 0.25 / q[0];
    q[1] = s * (a(1, 2) - a(2, 1));
    q[2] = s * (a(2, 0) - a(0, 2));
    q[3] = s * (a(0, 1) - a(1, 0));
  } else {
    int i = 0;
    if (a(1, 1) > a(0, 0)) i = 1;
    if (a(2, 2) > a(i, i)) i = 2;
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    q[i + 1] = 0.5 * std::sqrt(std::max(0.0, 1.0 + a(i, i) - a(j, j) - a(k, k)));
    const double s = 0.25 / q[i + 1];
    q[0] = s * (a(j, k) - a(k, j));
    q[j + 1] = s * (a(i, j) + a(j, i));
    q[k + 1] = s * (a(i, k) + a(k, i));
  }
  Quat out{q[0], Vector3d(q[1], q[2], q[3])};
  if (out.q0 < 0.0) {
    out.q0 = -out.q0;
    out.qv = -out.qv;
  }
  return out.normalized();
}

// Rotation angle between two attitude matrices, rad.
inline double rotation_angle_between(const Matrix3d& a, const Matrix3d& b) {
  const double c = 0.5 * ((a * b.transpose()).trace() - 1.0);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

// Small-angle rotation from a rotation vector (axis * angle).
inline Matrix3d rotation_from_axis_angle(const Vector3d& axis, double angle) {
  if (angle == 0.0) return Matrix3d::Identity();
  const Vector3d n = axis.normalized();
  const Matrix3d k = skew(n);
  return Matrix3d::Identity() + std::sin(angle) * k +
         (1.0 - std::cos(angle)) * k * k;
}

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace navsim

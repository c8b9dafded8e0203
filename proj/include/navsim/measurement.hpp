// measurement.hpp - analytic planet-pixel measurement model.
//
// First-order light-time delay (closed form), first-order relativistic
// aberration warp, pinhole projection, and the full variational Jacobian of
// the pixel with respect to (r, v, q_v, r_pl, v_pl). Two configurations:
// case1_full applies the aberration warp inside the model, case2_lt_only
// assumes the observation was de-aberrated upstream.
#pragma once

#include <cmath>
#include <optional>

#include "navsim/camera.hpp"
#include "navsim/core.hpp"
#include "navsim/ephemeris.hpp"

namespace navsim {

enum class MeasurementMode { case1_full, case2_lt_only };

struct LightTimeSolution {
  double delta_t = 0.0;          // s, >= 0
  Vector3d emission_position = Vector3d::Zero();  // r_pl(t) - v_pl * delta_t, km
  double beta_pl = 0.0;          // |v_pl| / c
  double cos_eps = 0.0;          // cosine of planet flight-path angle
};

// Closed-form first-order light-time delay from the linearized emission
// constraint. The positive root is the physical one.
inline LightTimeSolution light_time_delay(const Vector3d& r_sc,
                                          const Vector3d& r_pl,
                                          const Vector3d& v_pl) {
  const double c = constants::kSpeedOfLightKmS;
  const Vector3d rel = r_pl - r_sc;
  const double dist = rel.norm();
  LightTimeSolution sol;
  sol.beta_pl = v_pl.norm() / c;
  const double b2 = sol.beta_pl * sol.beta_pl;
  // cos(eps): angle between the planet velocity and the planet->spacecraft
  // relative position seen from the planet side enters through r_rel . v_pl.
  sol.cos_eps = (dist > 0.0 && v_pl.norm() > 0.0)
                    ? rel.dot(v_pl) / (dist * v_pl.norm())
                    : 0.0;
  sol.delta_t = dist / (c * (1.0 - b2)) *
                (-sol.beta_pl * sol.cos_eps +
                 std::sqrt(b2 * (sol.cos_eps * sol.cos_eps - 1.0) + 1.0));
  sol.emission_position = r_pl - v_pl * sol.delta_t;
  return sol;
}

// l' = l + l x (beta x l), renormalized. First order in v/c.
inline Vector3d aberrate_los(const Vector3d& los, const Vector3d& v_kms) {
  const Vector3d beta = v_kms / constants::kSpeedOfLightKmS;
  const Vector3d warped = los + los.cross(beta.cross(los));
  return warped.normalized();
}

struct MeasurementPrediction {
  Vector2d pixel = Vector2d::Zero();
  Vector3d los = Vector3d::UnitZ();             // light-time corrected LoS
  Vector3d los_aberrated = Vector3d::UnitZ();   // equals los in case2
  LightTimeSolution light_time;
  MeasurementMode mode = MeasurementMode::case1_full;
  bool in_front = true;
};

struct LightTimeOptions {
  bool apply_light_time = true;   // off reduces emission position to r_pl(t)
  bool apply_aberration = true;   // off forces case2 behavior
};

inline LightTimeOptions options_for_mode(MeasurementMode mode) {
  LightTimeOptions opt;
  opt.apply_aberration = (mode == MeasurementMode::case1_full);
  return opt;
}

// Predicted planet pixel for spacecraft state (r, v) and attitude A(q).
inline MeasurementPrediction predict_measurement(
    const Vector3d& r_sc, const Vector3d& v_sc, const Matrix3d& attitude,
    const Vector3d& r_pl, const Vector3d& v_pl, const CameraModel& camera,
    MeasurementMode mode, const LightTimeOptions& opts) {
  MeasurementPrediction pred;
  pred.mode = mode;
  if (opts.apply_light_time) {
    pred.light_time = light_time_delay(r_sc, r_pl, v_pl);
  } else {
    pred.light_time.delta_t = 0.0;
    pred.light_time.emission_position = r_pl;
  }
  pred.los = (pred.light_time.emission_position - r_sc).normalized();
  pred.los_aberrated = (mode == MeasurementMode::case1_full && opts.apply_aberration)
                           ? aberrate_los(pred.los, v_sc)
                           : pred.los;
  const auto px = project(camera, attitude, pred.los_aberrated);
  pred.in_front = px.has_value();
  if (px) pred.pixel = *px;
  return pred;
}

inline MeasurementPrediction predict_measurement(
    const Vector3d& r_sc, const Vector3d& v_sc, const Matrix3d& attitude,
    const Vector3d& r_pl, const Vector3d& v_pl, const CameraModel& camera,
    MeasurementMode mode) {
  return predict_measurement(r_sc, v_sc, attitude, r_pl, v_pl, camera, mode,
                             options_for_mode(mode));
}

// Gradients of the light-time delay: d(dt) = grad_rel . (d r_pl - d r) +
// grad_vpl . d v_pl, derived from the closed-form root.
inline void light_time_gradients(const Vector3d& r_sc, const Vector3d& r_pl,
                                 const Vector3d& v_pl, Vector3d* grad_rel,
                                 Vector3d* grad_vpl) {
  const double c = constants::kSpeedOfLightKmS;
  const Vector3d rel = r_pl - r_sc;
  const double p = rel.dot(v_pl);
  const double q = c * c - v_pl.squaredNorm();
  const double s = std::sqrt(rel.squaredNorm() * q + p * p);
  const double dt = (-p + s) / q;
  *grad_rel = ((q * rel + p * v_pl) / s - v_pl) / q;
  *grad_vpl = ((p * rel - rel.squaredNorm() * v_pl) / s - rel) / q +
              2.0 * v_pl * dt / q;
}

// Full measurement Jacobian: 2x15 sensitivity of the pixel to
// (dr, dv, dq_v, dr_pl, dv_pl), assembled from the analytic variational
// chain. The navigation filter consumes the first six columns.
inline Eigen::Matrix<double, 2, 15> measurement_jacobian(
    const Vector3d& r_sc, const Vector3d& v_sc, const Matrix3d& attitude,
    const Vector3d& r_pl, const Vector3d& v_pl, const CameraModel& camera,
    MeasurementMode mode, const LightTimeOptions& opts) {
  const double c = constants::kSpeedOfLightKmS;
  const MeasurementPrediction pred = predict_measurement(
      r_sc, v_sc, attitude, r_pl, v_pl, camera, mode, opts);

  // Perspective-divide Jacobian at the homogeneous projection point.
  const Vector3d h = camera.k_cam * (attitude * pred.los_aberrated);
  Eigen::Matrix<double, 2, 3> persp;
  persp << 1.0 / h.z(), 0.0, -h.x() / (h.z() * h.z()),
           0.0, 1.0 / h.z(), -h.y() / (h.z() * h.z());
  const Eigen::Matrix<double, 2, 3> front = persp * camera.k_cam * attitude;

  // d l_ab = warp_l * d l + warp_b * d beta_sc (identity blocks in case2).
  const Vector3d& l = pred.los;
  Matrix3d warp_l = Matrix3d::Identity();
  Matrix3d warp_b = Matrix3d::Zero();
  const bool aberr = (mode == MeasurementMode::case1_full && opts.apply_aberration);
  if (aberr) {
    const Vector3d beta = v_sc / c;
    warp_l = Matrix3d::Identity() + 2.0 * beta * l.transpose() -
             l.dot(beta) * Matrix3d::Identity() - l * beta.transpose();
    warp_b = l.squaredNorm() * Matrix3d::Identity() - l * l.transpose();
  }

  // d l = P_l (d r_pl(tau) - d r), the unit-vector projector over the range.
  const Vector3d d_vec = pred.light_time.emission_position - r_sc;
  const double dist = d_vec.norm();
  const Matrix3d unit_proj =
      (Matrix3d::Identity() - (d_vec / dist) * (d_vec / dist).transpose()) / dist;

  // d r_pl(tau) = d r_pl - dt d v_pl - v_pl d(dt).
  Matrix3d demis_drpl = Matrix3d::Identity();
  Matrix3d demis_dr = Matrix3d::Zero();
  Matrix3d demis_dvpl = Matrix3d::Zero();
  if (opts.apply_light_time) {
    Vector3d grad_rel, grad_vpl;
    light_time_gradients(r_sc, r_pl, v_pl, &grad_rel, &grad_vpl);
    demis_drpl = Matrix3d::Identity() - v_pl * grad_rel.transpose();
    demis_dr = v_pl * grad_rel.transpose();
    demis_dvpl = -pred.light_time.delta_t * Matrix3d::Identity() -
                 v_pl * grad_vpl.transpose();
  }

  const Eigen::Matrix<double, 2, 3> chain = front * warp_l * unit_proj;

  Eigen::Matrix<double, 2, 15> pi = Eigen::Matrix<double, 2, 15>::Zero();
  pi.block<2, 3>(0, 0) = chain * (demis_dr - Matrix3d::Identity());  // d r
  if (aberr) pi.block<2, 3>(0, 3) = front * warp_b / c;              // d v
  pi.block<2, 3>(0, 6) = persp * camera.k_cam * attitude *
                         2.0 * skew(pred.los_aberrated);             // d q_v
  pi.block<2, 3>(0, 9) = chain * demis_drpl;                         // d r_pl
  pi.block<2, 3>(0, 12) = chain * demis_dvpl;                        // d v_pl
  return pi;
}

inline Eigen::Matrix<double, 2, 15> measurement_jacobian(
    const Vector3d& r_sc, const Vector3d& v_sc, const Matrix3d& attitude,
    const Vector3d& r_pl, const Vector3d& v_pl, const CameraModel& camera,
    MeasurementMode mode) {
  return measurement_jacobian(r_sc, v_sc, attitude, r_pl, v_pl, camera, mode,
                              options_for_mode(mode));
}

}  // namespace navsim

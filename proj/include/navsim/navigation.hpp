// navigation.hpp - extended Kalman filter core.
//
// Time update integrates the non-dimensional mean and covariance through the
// dynamics (see dynamics.hpp); the measurement update is a Joseph-form EKF
// step on planet pixel observations with per-axis innovation gating.
#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "navsim/camera.hpp"
#include "navsim/core.hpp"
#include "navsim/dynamics.hpp"
#include "navsim/measurement.hpp"
#include "navsim/rng.hpp"

namespace navsim {

struct FilterState {
  State12 x_nd = State12::Zero();
  Matrix12d p_nd = Matrix12d::Identity();
  double t_nd = 0.0;
};

struct FilterParams {
  double sigma_px = 0.1;   // measurement noise root, per axis (px)
  double gate_k = 3.0;     // per-axis innovation gate multiplier
};

// Initial estimate drawn around the truth: x0 = x_true + 3 sqrt(diag(P0)) . k
// with k uniform in [-1, 1] per axis (dimensional units).
inline State12 sample_initial_estimate(const State12& x_true_dim,
                                       const State12& sigma_dim, Rng& rng) {
  State12 x = x_true_dim;
  for (int i = 0; i < 12; ++i)
    x[i] += 3.0 * sigma_dim[i] * rng.uniform(-1.0, 1.0);
  return x;
}

inline Matrix12d initial_covariance(const State12& sigma_dim) {
  return State12(sigma_dim.array().square()).asDiagonal();
}

// Measurement matrix on the non-dimensional 12-state from the 2x15 pixel
// Jacobian: columns (r, v) chain through the unit scaling, the Gauss-Markov
// channels do not enter the measurement.
inline Eigen::Matrix<double, 2, 12> measurement_matrix_nd(
    const Eigen::Matrix<double, 2, 15>& pi, const ScaleSet& scales) {
  Eigen::Matrix<double, 2, 12> h = Eigen::Matrix<double, 2, 12>::Zero();
  h.block<2, 3>(0, 0) = pi.block<2, 3>(0, 0) * scales.du_km;
  h.block<2, 3>(0, 3) = pi.block<2, 3>(0, 3) * scales.vu_kms();
  return h;
}

struct UpdateResult {
  bool accepted = false;
  Vector2d innovation = Vector2d::Zero();
  Vector2d innovation_sigma = Vector2d::Zero();
  double nis = 0.0;  // normalized innovation squared (2 dof when accepted)
};

// Joseph-form EKF measurement update with per-axis gating: the observation is
// rejected whole when any innovation component exceeds k sigma.
inline UpdateResult ekf_update(FilterState& state,
                               const Eigen::Matrix<double, 2, 12>& h,
                               const Vector2d& z, const Vector2d& z_pred,
                               const FilterParams& params) {
  UpdateResult res;
  const Matrix2d r_cov =
      params.sigma_px * params.sigma_px * Matrix2d::Identity();
  const Matrix2d m = h * state.p_nd * h.transpose() + r_cov;
  res.innovation = z - z_pred;
  res.innovation_sigma = m.diagonal().cwiseSqrt();
  for (int i = 0; i < 2; ++i) {
    if (std::abs(res.innovation[i]) >
        params.gate_k * res.innovation_sigma[i])
      return res;  // rejected
  }
  const Matrix2d m_inv = m.inverse();
  res.nis = res.innovation.dot(m_inv * res.innovation);
  const Eigen::Matrix<double, 12, 2> k = state.p_nd * h.transpose() * m_inv;
  state.x_nd += k * res.innovation;
  const Matrix12d ikh = Matrix12d::Identity() - k * h;
  state.p_nd = ikh * state.p_nd * ikh.transpose() +
               k * r_cov * k.transpose();
  state.p_nd = 0.5 * (state.p_nd + state.p_nd.transpose()).eval();
  res.accepted = true;
  return res;
}

// Convenience wrapper: predicts the planet pixel from the current estimate and
// applies the update. The attitude comes from the image-processing chain.
inline UpdateResult process_planet_measurement(
    FilterState& state, const Matrix3d& attitude, const Vector2d& observed_px,
    const Vector3d& r_pl, const Vector3d& v_pl, const CameraModel& camera,
    MeasurementMode mode, const LightTimeOptions& opts,
    const FilterParams& params, const ScaleSet& scales) {
  const State12 x_dim = scales.state_to_dim(state.x_nd);
  const Vector3d r_sc = x_dim.segment<3>(0);
  const Vector3d v_sc = x_dim.segment<3>(3);
  const auto pred = predict_measurement(r_sc, v_sc, attitude, r_pl, v_pl,
                                        camera, mode, opts);
  if (!pred.in_front) return {};
  const auto pi = measurement_jacobian(r_sc, v_sc, attitude, r_pl, v_pl,
                                       camera, mode, opts);
  return ekf_update(state, measurement_matrix_nd(pi, scales), observed_px,
                    pred.pixel, params);
}

// Per-epoch record for histories and consistency statistics.
enum class MeasurementOutcome { none, accepted, gated, ip_failed };

inline const char* outcome_name(MeasurementOutcome o) {
  switch (o) {
    case MeasurementOutcome::none: return "none";
    case MeasurementOutcome::accepted: return "accepted";
    case MeasurementOutcome::gated: return "gated";
    case MeasurementOutcome::ip_failed: return "ip_failed";
  }
  return "?";
}

struct NavRecord {
  double t_s = 0.0;
  double err_r_km = 0.0;
  double err_v_kms = 0.0;
  double sigma3_r_km = 0.0;   // 3 rms-per-axis position bound
  double sigma3_v_kms = 0.0;
  double nees = 0.0;          // 12-dof normalized estimation error squared
  MeasurementOutcome outcome = MeasurementOutcome::none;
  int tracked_planet = -1;    // PlanetId as int, -1 when propagating only
};

inline NavRecord make_record(const FilterState& state, const State12& x_true_dim,
                             const ScaleSet& scales) {
  NavRecord rec;
  rec.t_s = scales.time_to_dim(state.t_nd);
  const State12 x_dim = scales.state_to_dim(state.x_nd);
  const Matrix12d p_dim = scales.cov_to_dim(state.p_nd);
  const State12 err = x_dim - x_true_dim;
  rec.err_r_km = err.segment<3>(0).norm();
  rec.err_v_kms = err.segment<3>(3).norm();
  rec.sigma3_r_km = 3.0 * std::sqrt(p_dim.block<3, 3>(0, 0).trace());
  rec.sigma3_v_kms = 3.0 * std::sqrt(p_dim.block<3, 3>(3, 3).trace());
  const State12 err_nd = state.x_nd - scales.state_to_nd(x_true_dim);
  rec.nees = err_nd.dot(state.p_nd.ldlt().solve(err_nd));
  return rec;
}

}  // namespace navsim

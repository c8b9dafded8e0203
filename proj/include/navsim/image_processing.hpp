// image_processing.hpp - centroiding, star identification, attitude solution,
// and planet detection on rendered sky images.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "navsim/camera.hpp"
#include "navsim/core.hpp"
#include "navsim/kvector.hpp"
#include "navsim/measurement.hpp"
#include "navsim/rng.hpp"
#include "navsim/scene.hpp"
#include "navsim/star_catalog.hpp"

namespace navsim {

struct Centroid {
  Vector2d pixel = Vector2d::Zero();
  double signal_e = 0.0;  // background-subtracted component energy
  int n_pixels = 0;
};

struct CentroidingOptions {
  int window_half = 7;      // local-statistics window half width (15x15)
  double k_niblack = 1.5;   // extent threshold T = mu + k sigma
  double k_peak = 8.0;      // component must peak above mu + k_peak sigma
  double saturation_e = 2e5;  // pixels at full well always count as peaks
  int border_margin = 1;    // centroid window grows by this many pixels
  int max_centroids = 64;   // keep the brightest
};

namespace detail {
// Sliding-window mean and standard deviation from integral images.
struct LocalStats {
  int width = 0, height = 0, half = 0;
  std::vector<double> sum, sum2;

  LocalStats(const SkyImage& img, int window_half)
      : width(img.width), height(img.height), half(window_half) {
    const std::size_t n = static_cast<std::size_t>(width + 1) * (height + 1);
    sum.assign(n, 0.0);
    sum2.assign(n, 0.0);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double v = img.at(x, y);
        const std::size_t i = static_cast<std::size_t>(y + 1) * (width + 1) + x + 1;
        const std::size_t up = i - (width + 1);
        sum[i] = v + sum[i - 1] + sum[up] - sum[up - 1];
        sum2[i] = v * v + sum2[i - 1] + sum2[up] - sum2[up - 1];
      }
    }
  }

  void at(int x, int y, double* mean, double* sigma) const {
    const int x0 = std::max(0, x - half), x1 = std::min(width, x + half + 1);
    const int y0 = std::max(0, y - half), y1 = std::min(height, y + half + 1);
    const auto idx = [&](int xx, int yy) {
      return static_cast<std::size_t>(yy) * (width + 1) + xx;
    };
    const double n = static_cast<double>((x1 - x0) * (y1 - y0));
    const double s = sum[idx(x1, y1)] - sum[idx(x0, y1)] - sum[idx(x1, y0)] +
                     sum[idx(x0, y0)];
    const double s2 = sum2[idx(x1, y1)] - sum2[idx(x0, y1)] -
                      sum2[idx(x1, y0)] + sum2[idx(x0, y0)];
    // Pixel counts are non-negative, so clamp the cancellation residue the
    // integral-image differences leave behind in all-zero regions; a tiny
    // negative mean would otherwise promote exact-zero pixels above threshold.
    *mean = std::max(0.0, s / n);
    *sigma = std::sqrt(std::max(0.0, s2 / n - (s / n) * (s / n)));
  }
};
}  // namespace detail

// Local-threshold segmentation plus intensity-weighted center of gravity.
// Component extent uses T = mu + k sigma; a component is kept only if some
// pixel also clears the peak threshold, which rejects single-count noise.
// The local sigma is measured on quantized, zero-clamped counts and therefore
// understates the raw read noise; the default k values account for that.
inline std::vector<Centroid> extract_centroids(
    const SkyImage& img, const CentroidingOptions& opts = {}) {
  const detail::LocalStats stats(img, opts.window_half);
  const int w = img.width, h = img.height;
  std::vector<std::uint8_t> above(static_cast<std::size_t>(w) * h, 0);
  std::vector<double> bg(static_cast<std::size_t>(w) * h, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double mu, sg;
      stats.at(x, y, &mu, &sg);
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      bg[i] = mu;
      above[i] = img.at(x, y) > mu + opts.k_niblack * sg ? 1 : 0;
    }
  }

  std::vector<std::uint8_t> seen(static_cast<std::size_t>(w) * h, 0);
  std::vector<Centroid> out;
  std::vector<std::pair<int, int>> stack, component;
  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      const std::size_t i0 = static_cast<std::size_t>(y0) * w + x0;
      if (!above[i0] || seen[i0]) continue;
      // Flood fill, 8-connected.
      stack.clear();
      component.clear();
      stack.emplace_back(x0, y0);
      seen[i0] = 1;
      bool has_peak = false;
      while (!stack.empty()) {
        const auto [x, y] = stack.back();
        stack.pop_back();
        component.emplace_back(x, y);
        double mu, sg;
        stats.at(x, y, &mu, &sg);
        // Saturated sources form a flat plateau that inflates the local
        // statistics, so full-well pixels qualify as peaks unconditionally.
        if (img.at(x, y) > mu + opts.k_peak * sg ||
            img.at(x, y) >= opts.saturation_e)
          has_peak = true;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const std::size_t ni = static_cast<std::size_t>(ny) * w + nx;
            if (above[ni] && !seen[ni]) {
              seen[ni] = 1;
              stack.emplace_back(nx, ny);
            }
          }
        }
      }
      if (!has_peak) continue;

      // Weighted CoG over the component dilated by the border margin.
      int xmin = w, xmax = -1, ymin = h, ymax = -1;
      for (const auto& [x, y] : component) {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
      }
      xmin = std::max(0, xmin - opts.border_margin);
      ymin = std::max(0, ymin - opts.border_margin);
      xmax = std::min(w - 1, xmax + opts.border_margin);
      ymax = std::min(h - 1, ymax + opts.border_margin);
      Centroid c;
      double sx = 0.0, sy = 0.0, sw = 0.0;
      for (int y = ymin; y <= ymax; ++y) {
        for (int x = xmin; x <= xmax; ++x) {
          const std::size_t i = static_cast<std::size_t>(y) * w + x;
          const double wgt = img.at(x, y) - bg[i];
          if (wgt <= 0.0) continue;
          sw += wgt;
          sx += wgt * (x + 0.5);
          sy += wgt * (y + 0.5);
          ++c.n_pixels;
        }
      }
      if (sw <= 0.0) continue;
      c.pixel = {sx / sw, sy / sw};
      c.signal_e = sw;
      out.push_back(c);
    }
  }
  std::sort(out.begin(), out.end(), [](const Centroid& a, const Centroid& b) {
    return a.signal_e > b.signal_e;
  });
  if (static_cast<int>(out.size()) > opts.max_centroids)
    out.resize(opts.max_centroids);
  return out;
}

// Wahba's problem by SVD: attitude A (N -> C) minimizing
// sum_i w_i |u_i - A v_i|^2 for camera-frame u and inertial v.
inline Matrix3d solve_wahba_svd(const std::vector<Vector3d>& u_cam,
                                const std::vector<Vector3d>& v_inertial,
                                const std::vector<double>& weights = {}) {
  Matrix3d b = Matrix3d::Zero();
  for (std::size_t i = 0; i < u_cam.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    b += w * u_cam[i] * v_inertial[i].transpose();
  }
  Eigen::JacobiSVD<Matrix3d> svd(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vector3d d(1.0, 1.0,
             svd.matrixU().determinant() * svd.matrixV().determinant());
  return svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
}

struct StarIdOptions {
  int max_lis_centroids = 15;    // brightest centroids used for pair voting
  double pair_tolerance = 3.0 * 0.3 / 2900.0;  // rad, ~3 x centroid noise
  double retry_threshold_growth = 1.5;  // intensity-threshold multiplier
  int max_retries = 5;
  int min_votes = 3;
  int min_identified = 4;
  int ransac_iterations = 32;
  double ransac_gate_px = 3.0;
  double recursive_gate_px = 10.0;
};

struct StarIdResult {
  bool success = false;
  Matrix3d attitude = Matrix3d::Identity();  // N -> C
  std::vector<int> matched_star;  // per centroid: star_id or -1
  std::vector<Vector3d> u_cam;    // per inlier
  std::vector<Vector3d> v_inertial;
  std::vector<int> inlier_centroids;
  int retries_used = 0;
};

namespace detail {
// RANSAC over tentatively identified centroids; spikes and planets fall out
// as outliers. Returns inlier flags; empty when no consensus exists.
inline std::vector<std::uint8_t> ransac_inliers(
    const std::vector<Vector3d>& u, const std::vector<Vector3d>& v,
    const CameraModel& camera, const StarIdOptions& opts, Rng& rng) {
  const std::size_t n = u.size();
  if (n < 3) return {};
  std::vector<std::uint8_t> best;
  std::size_t best_count = 0;
  double best_residual = std::numeric_limits<double>::infinity();
  const double gate = opts.ransac_gate_px;
  for (int it = 0; it < opts.ransac_iterations; ++it) {
    std::size_t i = rng.uniform_index(n);
    std::size_t j = rng.uniform_index(n);
    std::size_t k = rng.uniform_index(n);
    if (i == j || j == k || i == k) continue;
    const Matrix3d a = solve_wahba_svd({u[i], u[j], u[k]}, {v[i], v[j], v[k]});
    std::vector<std::uint8_t> flags(n, 0);
    std::size_t count = 0;
    double residual = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      const auto p_obs = project(camera, Matrix3d::Identity(), u[m]);
      const auto p_pred = project(camera, a, v[m]);
      if (p_obs && p_pred && (*p_obs - *p_pred).norm() < gate) {
        flags[m] = 1;
        ++count;
        residual += (*p_obs - *p_pred).norm();
      }
    }
    // Deterministic reduction: inlier count, then residual, then iteration.
    if (count > best_count ||
        (count == best_count && residual < best_residual)) {
      best_count = count;
      best_residual = residual;
      best = std::move(flags);
    }
  }
  if (best_count < 3) return {};
  return best;
}
}  // namespace detail

// Lost-in-space identification: k-vector interstar-angle voting over the
// brightest centroids, retried with a widened tolerance when the vote table
// stays too thin, then a RANSAC-guarded Wahba solution.
inline StarIdResult identify_stars_lis(const std::vector<Centroid>& centroids,
                                       const KVectorCatalog& kv,
                                       const std::vector<StarRecord>& catalog,
                                       const CameraModel& camera, Rng& rng,
                                       const StarIdOptions& opts = {}) {
  StarIdResult res;
  res.matched_star.assign(centroids.size(), -1);
  const int nb_all =
      std::min<int>(opts.max_lis_centroids, static_cast<int>(centroids.size()));
  if (nb_all < 3) return res;

  std::map<int, Vector3d> star_los;
  for (const StarRecord& s : catalog) star_los[s.star_id] = s.los_inertial;

  std::vector<Vector3d> dirs(nb_all);
  for (int i = 0; i < nb_all; ++i)
    dirs[i] = unproject(camera, Matrix3d::Identity(), centroids[i].pixel);

  const double tol = opts.pair_tolerance;
  // Retry heuristic: raise the intensity threshold, dropping the faintest
  // centroids (centroids arrive sorted bright-first).
  double intensity_threshold = 0.0;
  for (int attempt = 0; attempt <= opts.max_retries; ++attempt) {
    res.retries_used = attempt;
    int nb = nb_all;
    while (nb > 3 && centroids[nb - 1].signal_e < intensity_threshold) --nb;
    if (nb < 3) break;
    // Vote table: (centroid, star_id) -> count.
    std::map<std::pair<int, int>, int> votes;
    for (int i = 0; i < nb; ++i) {
      for (int j = i + 1; j < nb; ++j) {
        const double ang = std::acos(std::clamp(dirs[i].dot(dirs[j]), -1.0, 1.0));
        if (ang > kv.max_angle) continue;
        for (const StarPair& p : kv.range_query(ang, tol)) {
          // Orientation of the pair is unknown; vote both assignments.
          ++votes[{i, p.star_id_a}];
          ++votes[{i, p.star_id_b}];
          ++votes[{j, p.star_id_a}];
          ++votes[{j, p.star_id_b}];
        }
      }
    }
    // Per centroid, the clear vote winner.
    std::vector<int> winner(nb, -1);
    std::vector<int> winner_votes(nb, 0);
    for (const auto& [key, count] : votes) {
      const auto [ci, sid] = key;
      if (count > winner_votes[ci]) {
        winner_votes[ci] = count;
        winner[ci] = sid;
      }
    }
    // A star may win at most one centroid; keep the stronger claim.
    std::map<int, int> claimed;  // star_id -> centroid
    for (int i = 0; i < nb; ++i) {
      if (winner[i] < 0 || winner_votes[i] < opts.min_votes) {
        winner[i] = -1;
        continue;
      }
      const auto it = claimed.find(winner[i]);
      if (it == claimed.end()) {
        claimed[winner[i]] = i;
      } else if (winner_votes[i] > winner_votes[it->second]) {
        winner[it->second] = -1;
        it->second = i;
      } else {
        winner[i] = -1;
      }
    }

    std::vector<Vector3d> u, v;
    std::vector<int> cids;
    for (int i = 0; i < nb; ++i) {
      if (winner[i] < 0) continue;
      u.push_back(dirs[i]);
      v.push_back(star_los.at(winner[i]));
      cids.push_back(i);
    }
    if (static_cast<int>(u.size()) >= opts.min_identified) {
      const auto flags = detail::ransac_inliers(u, v, camera, opts, rng);
      if (!flags.empty()) {
        for (std::size_t m = 0; m < u.size(); ++m) {
          if (!flags[m]) continue;
          res.u_cam.push_back(u[m]);
          res.v_inertial.push_back(v[m]);
          res.inlier_centroids.push_back(cids[m]);
          res.matched_star[cids[m]] = winner[cids[m]];
        }
        if (static_cast<int>(res.u_cam.size()) >= 3) {
          res.attitude = solve_wahba_svd(res.u_cam, res.v_inertial);
          res.success = true;
          return res;
        }
        res.u_cam.clear();
        res.v_inertial.clear();
        res.inlier_centroids.clear();
        res.matched_star.assign(centroids.size(), -1);
      }
    }
    intensity_threshold = std::max(intensity_threshold,
                                   centroids[nb - 1].signal_e) *
                          opts.retry_threshold_growth;
  }
  return res;
}

// Tracking-mode identification: catalog stars projected through the predicted
// attitude are matched to the nearest centroid inside the gate.
inline StarIdResult identify_stars_recursive(
    const std::vector<Centroid>& centroids,
    const std::vector<StarRecord>& catalog, const CameraModel& camera,
    const Matrix3d& attitude_pred, const StarIdOptions& opts = {},
    double mag_limit = 5.5) {
  StarIdResult res;
  res.matched_star.assign(centroids.size(), -1);
  std::vector<std::uint8_t> taken(centroids.size(), 0);
  for (const StarRecord& s : catalog) {
    if (s.magnitude > mag_limit) continue;
    const auto px = project(camera, attitude_pred, s.los_inertial);
    if (!px || !camera.contains(*px)) continue;
    int best = -1;
    double best_d = opts.recursive_gate_px;
    for (std::size_t i = 0; i < centroids.size(); ++i) {
      if (taken[i]) continue;
      const double d = (centroids[i].pixel - *px).norm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(i);
      }
    }
    if (best < 0) continue;
    taken[best] = 1;
    res.matched_star[best] = s.star_id;
    res.u_cam.push_back(
        unproject(camera, Matrix3d::Identity(), centroids[best].pixel));
    res.v_inertial.push_back(s.los_inertial);
    res.inlier_centroids.push_back(best);
  }
  if (res.u_cam.size() >= 3) {
    res.attitude = solve_wahba_svd(res.u_cam, res.v_inertial);
    res.success = true;
  }
  return res;
}

// Removes stellar aberration from observed camera-frame unit vectors using
// the estimated attitude and velocity, exact in the aberration angle:
//   tan(eps) = (v/c) sin(theta) / (1 - (v/c) cos(theta)),
//   rho_corr = (rho_obs sin(theta + eps) - v_hat sin(eps)) / sin(theta).
inline std::vector<Vector3d> correct_star_aberration(
    const std::vector<Vector3d>& u_cam_obs, const Matrix3d& attitude_est,
    const Vector3d& v_est_kms) {
  const double beta = v_est_kms.norm() / constants::kSpeedOfLightKmS;
  if (beta <= 0.0) return u_cam_obs;
  const Vector3d v_hat_cam = attitude_est * v_est_kms.normalized();
  std::vector<Vector3d> out;
  out.reserve(u_cam_obs.size());
  for (const Vector3d& rho : u_cam_obs) {
    const double ct = std::clamp(rho.dot(v_hat_cam), -1.0, 1.0);
    const double theta = std::acos(ct);
    const double st = std::sin(theta);
    if (st < 1e-12) {
      out.push_back(rho);  // along-track: aberration vanishes
      continue;
    }
    const double eps = std::atan2(beta * st, 1.0 - beta * ct);
    out.push_back(
        ((std::sin(theta + eps) * rho - std::sin(eps) * v_hat_cam) / st)
            .normalized());
  }
  return out;
}

struct PlanetSearchSigmas {
  double sigma_qv = arcsec2rad(20.0);  // per vector quaternion component
  double sigma_r_km = 1e5;             // spacecraft position, per axis
  double sigma_rpl_km = 0.0;           // planet ephemeris position, per axis
};

struct PlanetSearchRegion {
  Vector2d center = Vector2d::Zero();
  Matrix2d covariance = Matrix2d::Identity();
  // 0.9973-probability ellipse semi-axes (a >= b) and orientation.
  double a = 0.0;
  double b = 0.0;
  double psi = 0.0;
  bool in_front = true;
};

// 0.9973-probability ellipse: chi-square(2 dof) quantile.
inline constexpr double kPlanetGateChi2 = 11.8292;

// First-order pixel covariance of the predicted planet location,
// P = G S G^T with G the 2x10 sensitivity to (q0, qv, r, r_pl) and S the
// diagonal of the a priori variances.
inline PlanetSearchRegion planet_projection_covariance(
    const Quat& q, const Vector3d& r_sc, const Vector3d& r_pl,
    const CameraModel& camera, const PlanetSearchSigmas& sigmas = {}) {
  PlanetSearchRegion region;
  const Matrix3d a = q.to_dcm();
  const Vector3d d_vec = r_pl - r_sc;
  const Vector3d l = d_vec.normalized();
  const auto px = project(camera, a, l);
  region.in_front = px.has_value();
  if (!px) return region;
  region.center = *px;

  const Vector3d h = camera.k_cam * (a * l);
  Eigen::Matrix<double, 2, 3> persp;
  persp << 1.0 / h.z(), 0.0, -h.x() / (h.z() * h.z()),
           0.0, 1.0 / h.z(), -h.y() / (h.z() * h.z());
  const Eigen::Matrix<double, 2, 3> pk = persp * camera.k_cam;

  // d(A l) for the quaternion parametrization
  // A = (q0^2 - qv.qv) I + 2 qv qv^T - 2 q0 [qv]x.
  const Vector3d dq0 = 2.0 * q.q0 * l - 2.0 * q.qv.cross(l);
  const Matrix3d dqv = -2.0 * l * q.qv.transpose() +
                       2.0 * q.qv.dot(l) * Matrix3d::Identity() +
                       2.0 * q.qv * l.transpose() + 2.0 * q.q0 * skew(l);
  const Matrix3d unit_proj =
      (Matrix3d::Identity() - l * l.transpose()) / d_vec.norm();

  Eigen::Matrix<double, 2, 10> g = Eigen::Matrix<double, 2, 10>::Zero();
  g.block<2, 1>(0, 0) = pk * dq0;
  g.block<2, 3>(0, 1) = pk * dqv;
  g.block<2, 3>(0, 4) = pk * a * unit_proj * (-1.0);
  g.block<2, 3>(0, 7) = pk * a * unit_proj;

  Eigen::Matrix<double, 10, 1> s;
  s(0) = 0.0;  // small-error-angle formulation: no scalar-part variance
  s.segment<3>(1).setConstant(sigmas.sigma_qv * sigmas.sigma_qv);
  s.segment<3>(4).setConstant(sigmas.sigma_r_km * sigmas.sigma_r_km);
  s.segment<3>(7).setConstant(sigmas.sigma_rpl_km * sigmas.sigma_rpl_km);
  region.covariance = g * s.asDiagonal() * g.transpose();

  const Eigen::SelfAdjointEigenSolver<Matrix2d> eig(region.covariance);
  region.a = std::sqrt(std::max(0.0, eig.eigenvalues()[1]) * kPlanetGateChi2);
  region.b = std::sqrt(std::max(0.0, eig.eigenvalues()[0]) * kPlanetGateChi2);
  const Vector2d major = eig.eigenvectors().col(1);
  region.psi = std::atan2(major.y(), major.x());
  return region;
}

// Planet = unmatched centroid with the smallest Mahalanobis distance to the
// predicted location, accepted inside the 0.9973 ellipse.
inline std::optional<std::size_t> identify_planet(
    const std::vector<Centroid>& centroids,
    const std::vector<int>& matched_star, const PlanetSearchRegion& region,
    double gate_chi2 = kPlanetGateChi2) {
  if (!region.in_front) return std::nullopt;
  const Matrix2d info = region.covariance.inverse();
  std::optional<std::size_t> best;
  double best_d2 = gate_chi2;
  for (std::size_t i = 0; i < centroids.size(); ++i) {
    if (i < matched_star.size() && matched_star[i] >= 0) continue;
    const Vector2d d = centroids[i].pixel - region.center;
    const double d2 = d.dot(info * d);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

}  // namespace navsim

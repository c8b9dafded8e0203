// selection.hpp - planet visibility and optimal beacon-pair selection.
#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "navsim/camera.hpp"
#include "navsim/ephemeris.hpp"
#include "navsim/scene.hpp"

namespace navsim {

struct VisibilityReport {
  PlanetId planet_id = PlanetId::Venus;
  double apparent_magnitude = 0.0;
  double sea = 0.0;  // Sun-probe-planet angle, rad
  bool visible = false;
};

struct VisibilityThresholds {
  double mag_limit = 7.0;
  double sea_min = deg2rad(20.0);
};

inline std::vector<VisibilityReport> visible_planets(
    double t, const Vector3d& r_sc, const EphemerisSet& ephemerides,
    const VisibilityThresholds& thresholds = {}) {
  std::vector<VisibilityReport> reports;
  const Vector3d sun_los = (-r_sc).normalized();
  for (const auto& [id, eph] : ephemerides.bodies()) {
    const auto [r_pl, v_pl] = ephemerides.planet_state(id, t);
    VisibilityReport rep;
    rep.planet_id = id;
    rep.apparent_magnitude = apparent_magnitude(id, r_pl, r_sc);
    const Vector3d los = (r_pl - r_sc).normalized();
    rep.sea = std::acos(std::clamp(los.dot(sun_los), -1.0, 1.0));
    rep.visible = rep.apparent_magnitude < thresholds.mag_limit &&
                  rep.sea > thresholds.sea_min;
    reports.push_back(rep);
  }
  return reports;
}

// Triangulation figure of merit for a beacon pair; lower is better.
// d is non-dimensionalized by 1 AU. Collinear lines of sight are
// untriangulatable and return +inf.
inline double figure_of_merit(const Vector3d& rho_i, const Vector3d& rho_j,
                              const Vector3d& r_i, const Vector3d& r_j,
                              double sigma_str) {
  const double cg = std::clamp(rho_i.dot(rho_j), -1.0, 1.0);
  const double gamma = std::acos(cg);
  const double sg = std::sin(gamma);
  if (sg < 1e-9) return std::numeric_limits<double>::infinity();
  const Vector3d d = (r_i - r_j) / constants::kAuKm;
  const Matrix3d proj_sum =
      (Matrix3d::Identity() - rho_i * rho_i.transpose()) +
      (Matrix3d::Identity() - rho_j * rho_j.transpose());
  return sigma_str * sigma_str * (1.0 + cg * cg) / (sg * sg * sg * sg) *
         d.dot(proj_sum * d);
}

// Minimizes the figure of merit over unordered visible pairs. Ties break on
// the lower planet-id pair. Empty when fewer than two planets are visible.
inline std::optional<std::pair<PlanetId, PlanetId>> select_optimal_pair(
    const std::vector<VisibilityReport>& reports, double t,
    const Vector3d& r_sc, const EphemerisSet& ephemerides, double sigma_str) {
  std::vector<PlanetId> vis;
  for (const auto& rep : reports)
    if (rep.visible) vis.push_back(rep.planet_id);
  if (vis.size() < 2) return std::nullopt;
  std::sort(vis.begin(), vis.end());

  std::optional<std::pair<PlanetId, PlanetId>> best;
  double best_j = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < vis.size(); ++i) {
    for (std::size_t j = i + 1; j < vis.size(); ++j) {
      const Vector3d r_i = ephemerides.planet_state(vis[i], t).first;
      const Vector3d r_j = ephemerides.planet_state(vis[j], t).first;
      const double merit =
          figure_of_merit((r_i - r_sc).normalized(), (r_j - r_sc).normalized(),
                          r_i, r_j, sigma_str);
      if (merit < best_j) {
        best_j = merit;
        best = {vis[i], vis[j]};
      }
    }
  }
  if (!best || !std::isfinite(best_j)) return std::nullopt;
  return best;
}

}  // namespace navsim

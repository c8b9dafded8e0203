// scene.hpp - synthetic deep-space image rendering with ground truth.
//
// The renderer is the truth model: planet light time is solved iteratively on
// the exact emission constraint (not the filter's closed form), and both star
// and planet lines of sight are aberration-warped with the true velocity.
// Sources splat an error-function-integrated Gaussian PSF; cosmic rays are
// single saturated pixels; shot and read noise are applied per pixel.
#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "navsim/camera.hpp"
#include "navsim/core.hpp"
#include "navsim/ephemeris.hpp"
#include "navsim/measurement.hpp"
#include "navsim/rng.hpp"
#include "navsim/star_catalog.hpp"

namespace navsim {

struct SkyImage {
  int width = 0;
  int height = 0;
  double timestamp = 0.0;  // s TDB
  std::vector<double> pixels;  // electrons, row-major

  double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  double total_energy() const {
    double sum = 0.0;
    for (double p : pixels) sum += p;
    return sum;
  }
};

struct GroundTruth {
  std::vector<std::pair<int, Vector2d>> star_truths;       // star_id, pixel
  std::vector<std::pair<PlanetId, Vector2d>> planet_truths;
  std::vector<Vector2d> cosmic_rays;
  Quat true_attitude;
  Vector3d true_position = Vector3d::Zero();  // km
  Vector3d true_velocity = Vector3d::Zero();  // km/s
};

struct NoiseConfig {
  double read_noise_sigma = 5.0;  // electrons
  bool shot_noise = true;
  int n_cr = 1;                   // cosmic-ray pixels
  double jitter_sigma = 0.0;      // rad, per axis
  double attitude_knowledge_sigma = 0.0;  // rad, per axis
  // Sensor details for quantization / saturation.
  double gain_e_per_count = 8.0;
  double full_well_e = 200000.0;
  bool quantize = true;
  double render_mag_limit = 8.0;  // faintest source splatted

  void validate() const {
    if (read_noise_sigma < 0 || n_cr < 0 || jitter_sigma < 0 ||
        attitude_knowledge_sigma < 0)
      throw ConfigError("noise config fields must be non-negative");
  }
};

inline NoiseConfig noise_from_json(const nlohmann::json& j) {
  NoiseConfig n;
  n.read_noise_sigma = j.at("read_noise_sigma_e").get<double>();
  n.shot_noise = j.at("shot_noise").get<bool>();
  n.n_cr = j.at("n_cr").get<int>();
  n.jitter_sigma = arcsec2rad(j.at("jitter_sigma_arcsec").get<double>());
  n.attitude_knowledge_sigma =
      arcsec2rad(j.value("attitude_knowledge_sigma_arcsec", 0.0));
  n.gain_e_per_count = j.value("gain_e_per_count", 8.0);
  n.full_well_e = j.value("full_well_e", 200000.0);
  n.quantize = j.value("quantize", true);
  n.render_mag_limit = j.value("render_mag_limit", 8.0);
  n.validate();
  return n;
}

// Per-planet absolute magnitude V(1,0) plus a configurable polynomial in the
// phase angle (rad). Defaults use standard V(1,0) values and no phase term.
struct PhotometryModel {
  std::map<PlanetId, double> v10 = {
      {PlanetId::Venus, -4.38},
      {PlanetId::EarthMoonBarycenter, -3.99},
      {PlanetId::Mars, -1.52},
      {PlanetId::Jupiter, -9.40},
      {PlanetId::Saturn, -8.88}};
  std::vector<double> phase_coeffs;  // magnitudes per rad^k, k >= 1

  double phase_term(double alpha) const {
    double term = 0.0, pw = alpha;
    for (double c : phase_coeffs) {
      term += c * pw;
      pw *= alpha;
    }
    return term;
  }
};

inline const PhotometryModel& default_photometry() {
  static const PhotometryModel model;
  return model;
}

// m = V(1,0) + 5 log10(d_sun[AU] * d_obs[AU]) + phase_term(alpha)
inline double apparent_magnitude(PlanetId planet_id, const Vector3d& r_pl,
                                 const Vector3d& r_sc,
                                 const PhotometryModel& model = default_photometry()) {
  const double d_sun = r_pl.norm() / constants::kAuKm;
  const double d_obs = (r_pl - r_sc).norm() / constants::kAuKm;
  const Vector3d to_sun = -r_pl;
  const Vector3d to_obs = r_sc - r_pl;
  const double alpha = std::acos(std::clamp(
      to_sun.normalized().dot(to_obs.normalized()), -1.0, 1.0));
  return model.v10.at(planet_id) + 5.0 * std::log10(d_sun * d_obs) +
         model.phase_term(alpha);
}

// Attitude pointing the boresight at target_los with uniform roll, perturbed
// by a small random rotation with per-axis sigma = jitter (plus knowledge).
inline Quat true_attitude(const Vector3d& target_los, const NoiseConfig& noise,
                          Rng& rng) {
  const Vector3d z = target_los.normalized();
  Vector3d ref = std::abs(z.z()) < 0.9 ? Vector3d::UnitZ() : Vector3d::UnitX();
  const Vector3d x0 = ref.cross(z).normalized();
  const Vector3d y0 = z.cross(x0);
  const double roll = rng.uniform(0.0, 2.0 * M_PI);
  const Vector3d x = std::cos(roll) * x0 + std::sin(roll) * y0;
  const Vector3d y = z.cross(x);
  Matrix3d a;  // rows are camera axes in N
  a.row(0) = x;
  a.row(1) = y;
  a.row(2) = z;
  const double sigma = std::sqrt(noise.jitter_sigma * noise.jitter_sigma +
                                 noise.attitude_knowledge_sigma *
                                     noise.attitude_knowledge_sigma);
  if (sigma > 0.0) {
    const Vector3d rotvec = rng.normal3(sigma);
    a = rotation_from_axis_angle(rotvec, rotvec.norm()) * a;
  }
  return dcm_to_quat(a);
}

// Re-point an existing attitude at a new target through the minimal slew
// (keeps the roll about the boresight), then apply the same jitter model.
// Used inside tracking windows so consecutive frames share a stable frame.
inline Quat true_attitude_tracking(const Quat& prev,
                                   const Vector3d& target_los,
                                   const NoiseConfig& noise, Rng& rng) {
  const Matrix3d a_prev = prev.to_dcm();
  const Vector3d b_prev = a_prev.row(2).transpose();
  const Vector3d z = target_los.normalized();
  Matrix3d a = a_prev;
  const Vector3d axis = b_prev.cross(z);
  const double s = axis.norm();
  if (s > 1e-15) {
    const double angle = std::atan2(s, b_prev.dot(z));
    a = a_prev * rotation_from_axis_angle(axis, angle).transpose();
  }
  const double sigma = std::sqrt(noise.jitter_sigma * noise.jitter_sigma +
                                 noise.attitude_knowledge_sigma *
                                     noise.attitude_knowledge_sigma);
  if (sigma > 0.0) {
    const Vector3d rotvec = rng.normal3(sigma);
    a = rotation_from_axis_angle(rotvec, rotvec.norm()) * a;
  }
  return dcm_to_quat(a);
}

// Exact emission epoch by fixed-point iteration on |r_pl(tau) - r_sc| = c (t - tau).
inline Vector3d emission_position_iterative(const EphemerisSet& eph,
                                            PlanetId id, double t,
                                            const Vector3d& r_sc,
                                            double* delta_t_out = nullptr) {
  double tau = t;
  Vector3d r_emit = eph.planet_state(id, t).first;
  for (int it = 0; it < 10; ++it) {
    const double dt = (r_emit - r_sc).norm() / constants::kSpeedOfLightKmS;
    const double tau_next = t - dt;
    r_emit = eph.planet_state(id, tau_next).first;
    if (std::abs(tau_next - tau) < 1e-10) {
      tau = tau_next;
      break;
    }
    tau = tau_next;
  }
  if (delta_t_out) *delta_t_out = t - tau;
  return r_emit;
}

namespace detail {
// Integral of a unit Gaussian over pixel column/row [k, k+1).
inline double pixel_fraction(double center, double sigma, int k) {
  const double inv = 1.0 / (sigma * std::sqrt(2.0));
  return 0.5 * (std::erf((k + 1.0 - center) * inv) -
                std::erf((k - center) * inv));
}

inline void splat(SkyImage& img, const Vector2d& px, double sigma,
                  double energy) {
  const int halfw = static_cast<int>(std::ceil(5.0 * sigma)) + 1;
  const int cx = static_cast<int>(std::floor(px.x()));
  const int cy = static_cast<int>(std::floor(px.y()));
  for (int y = cy - halfw; y <= cy + halfw; ++y) {
    if (y < 0 || y >= img.height) continue;
    const double fy = pixel_fraction(px.y(), sigma, y);
    for (int x = cx - halfw; x <= cx + halfw; ++x) {
      if (x < 0 || x >= img.width) continue;
      img.at(x, y) += energy * fy * pixel_fraction(px.x(), sigma, x);
    }
  }
}
}  // namespace detail

struct RenderOptions {
  bool apply_aberration = true;  // stars and planet warp with true velocity
  bool apply_light_time = true;  // planets rendered at emission position
  bool apply_noise = true;       // cosmic rays + shot/read noise + quantize
};

inline std::pair<SkyImage, GroundTruth> render(
    const Vector3d& r_true, const Vector3d& v_true, const Quat& attitude,
    double t, const std::vector<StarRecord>& catalog,
    const EphemerisSet& ephemerides, const CameraModel& camera,
    const NoiseConfig& noise, Rng& rng, const RenderOptions& opts = {},
    const PhotometryModel& photometry = default_photometry()) {
  SkyImage img;
  img.width = camera.width_px;
  img.height = camera.height_px;
  img.timestamp = t;
  img.pixels.assign(static_cast<std::size_t>(img.width) * img.height, 0.0);

  GroundTruth truth;
  truth.true_attitude = attitude;
  truth.true_position = r_true;
  truth.true_velocity = v_true;
  const Matrix3d a = attitude.to_dcm();
  const double margin = 5.0 * camera.defocus_sigma_px + 2.0;

  // Stars: fixed directions, aberration only.
  for (const StarRecord& star : catalog) {
    if (star.magnitude > noise.render_mag_limit) continue;
    const Vector3d los = opts.apply_aberration
                             ? aberrate_los(star.los_inertial, v_true)
                             : star.los_inertial;
    const auto px = project(camera, a, los);
    if (!px) continue;
    if (px->x() < -margin || px->x() > camera.width_px + margin ||
        px->y() < -margin || px->y() > camera.height_px + margin)
      continue;
    detail::splat(img, *px, camera.defocus_sigma_px,
                  magnitude_to_electrons(camera, star.magnitude));
    if (camera.contains(*px)) truth.star_truths.emplace_back(star.star_id, *px);
  }

  // Planets: exact light time, then aberration.
  for (const auto& [id, eph] : ephemerides.bodies()) {
    const Vector3d r_emit =
        opts.apply_light_time
            ? emission_position_iterative(ephemerides, id, t, r_true)
            : ephemerides.planet_state(id, t).first;
    Vector3d los = (r_emit - r_true).normalized();
    if (opts.apply_aberration) los = aberrate_los(los, v_true);
    const auto px = project(camera, a, los);
    if (!px) continue;
    if (px->x() < -margin || px->x() > camera.width_px + margin ||
        px->y() < -margin || px->y() > camera.height_px + margin)
      continue;
    const double mag = apparent_magnitude(id, r_emit, r_true, photometry);
    if (mag > noise.render_mag_limit) continue;
    detail::splat(img, *px, camera.defocus_sigma_px,
                  magnitude_to_electrons(camera, mag));
    if (camera.contains(*px)) truth.planet_truths.emplace_back(id, *px);
  }

  if (opts.apply_noise) {
    for (int i = 0; i < noise.n_cr; ++i) {
      const int x = static_cast<int>(rng.uniform_index(img.width));
      const int y = static_cast<int>(rng.uniform_index(img.height));
      img.at(x, y) = noise.full_well_e;
      truth.cosmic_rays.emplace_back(x + 0.5, y + 0.5);
    }
    for (double& p : img.pixels) {
      double v = p;
      if (noise.shot_noise && v > 0.0)
        v = static_cast<double>(rng.poisson(v));
      if (noise.read_noise_sigma > 0.0)
        v += rng.normal(0.0, noise.read_noise_sigma);
      v = std::clamp(v, 0.0, noise.full_well_e);
      if (noise.quantize)
        v = std::floor(v / noise.gain_e_per_count) * noise.gain_e_per_count;
      p = v;
    }
  }
  return {std::move(img), std::move(truth)};
}

// 16-bit little-endian-sample PGM (P5) in detector counts.
inline void write_pgm(const SkyImage& img, const NoiseConfig& noise,
                      const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write image: " + path);
  out << "P5\n" << img.width << " " << img.height << "\n65535\n";
  for (double p : img.pixels) {
    const double counts = p / noise.gain_e_per_count;
    const auto v = static_cast<std::uint16_t>(
        std::clamp(counts, 0.0, 65535.0));
    out.put(static_cast<char>(v & 0xff));
    out.put(static_cast<char>(v >> 8));
  }
}

inline nlohmann::json ground_truth_to_json(const GroundTruth& truth) {
  nlohmann::json j;
  j["true_attitude_q"] = {truth.true_attitude.q0, truth.true_attitude.qv.x(),
                          truth.true_attitude.qv.y(), truth.true_attitude.qv.z()};
  j["true_position_km"] = {truth.true_position.x(), truth.true_position.y(),
                           truth.true_position.z()};
  j["true_velocity_kms"] = {truth.true_velocity.x(), truth.true_velocity.y(),
                            truth.true_velocity.z()};
  j["stars"] = nlohmann::json::array();
  for (const auto& [id, px] : truth.star_truths)
    j["stars"].push_back({{"star_id", id}, {"px", {px.x(), px.y()}}});
  j["planets"] = nlohmann::json::array();
  for (const auto& [id, px] : truth.planet_truths)
    j["planets"].push_back({{"planet", planet_name(id)}, {"px", {px.x(), px.y()}}});
  j["cosmic_rays"] = nlohmann::json::array();
  for (const auto& px : truth.cosmic_rays)
    j["cosmic_rays"].push_back({px.x(), px.y()});
  return j;
}

}  // namespace navsim

// camera.hpp - ideal pinhole camera model and photometric signal map.
//
// Pixel convention: origin at the image top-left corner, pixel centers at
// integer + 0.5. The boresight therefore projects to (width/2, height/2).
// FoV + resolution are authoritative for the intrinsics; focal length and
// f-number only enter the photometric aperture area.
#pragma once

#include <cmath>
#include <optional>

#include <json.hpp>

#include "navsim/core.hpp"

namespace navsim {

struct CameraModel {
  double fov = deg2rad(20.0);  // full field of view across the width, rad
  int width_px = 1024;
  int height_px = 1024;
  double focal_mm = 40.0;
  double f_number = 2.2;
  double exposure_s = 0.4;
  double qe_tlens = 0.49;            // quantum efficiency x lens transmission
  double defocus_sigma_px = 0.5;     // Gaussian PSF sigma
  double phi0_photons_m2_s = 1.0e10; // zero-magnitude photon flux
  Matrix3d k_cam = Matrix3d::Identity();

  double focal_px() const { return k_cam(0, 0); }
  Vector2d principal_point() const { return {k_cam(0, 2), k_cam(1, 2)}; }

  double pixel_pitch_mm() const { return focal_mm / focal_px(); }

  double aperture_area_m2() const {
    const double d_m = (focal_mm / f_number) * 1e-3;
    return M_PI * d_m * d_m / 4.0;
  }

  bool contains(const Vector2d& px) const {
    return px.x() >= 0.0 && px.x() <= width_px && px.y() >= 0.0 &&
           px.y() <= height_px;
  }
};

inline CameraModel build_intrinsics(double fov, int width_px, int height_px,
                                    double focal_mm = 40.0) {
  if (!(fov > 0.0 && fov < M_PI))
    throw ConfigError("camera fov must be in (0, pi)");
  if (width_px <= 0 || height_px <= 0)
    throw ConfigError("camera image size must be positive");
  CameraModel cam;
  cam.fov = fov;
  cam.width_px = width_px;
  cam.height_px = height_px;
  cam.focal_mm = focal_mm;
  const double f_px = (width_px / 2.0) / std::tan(fov / 2.0);
  cam.k_cam = Matrix3d::Identity();
  cam.k_cam(0, 0) = f_px;
  cam.k_cam(1, 1) = f_px;
  cam.k_cam(0, 2) = width_px / 2.0;
  cam.k_cam(1, 2) = height_px / 2.0;
  return cam;
}

inline CameraModel camera_from_json(const nlohmann::json& j) {
  CameraModel cam = build_intrinsics(deg2rad(j.at("fov_deg").get<double>()),
                                     j.at("width_px").get<int>(),
                                     j.at("height_px").get<int>(),
                                     j.at("focal_mm").get<double>());
  cam.f_number = j.at("f_number").get<double>();
  cam.exposure_s = j.at("exposure_ms").get<double>() * 1e-3;
  cam.qe_tlens = j.at("qe_tlens").get<double>();
  cam.defocus_sigma_px = j.at("defocus_sigma_px").get<double>();
  cam.phi0_photons_m2_s = j.at("phi0_photons_m2_s").get<double>();
  return cam;
}

// Projects an inertial unit LoS through attitude A (N -> C) into pixel
// coordinates. Empty optional when the target is not in front of the camera.
inline std::optional<Vector2d> project(const CameraModel& cam,
                                       const Matrix3d& attitude,
                                       const Vector3d& los_inertial) {
  const Vector3d h = cam.k_cam * (attitude * los_inertial);
  if (h.z() <= 0.0) return std::nullopt;
  return Vector2d(h.x() / h.z(), h.y() / h.z());
}

// Inverse mapping (K A)^-1 applied to the homogeneous pixel, unit-normalized.
inline Vector3d unproject(const CameraModel& cam, const Matrix3d& attitude,
                          const Vector2d& pixel) {
  const Vector3d h(pixel.x(), pixel.y(), 1.0);
  const Vector3d los = (cam.k_cam * attitude).inverse() * h;
  return los.normalized();
}

// Expected source signal in electrons for a visual magnitude.
inline double magnitude_to_electrons(const CameraModel& cam, double magnitude) {
  return cam.phi0_photons_m2_s * std::pow(10.0, -0.4 * magnitude) *
         cam.aperture_area_m2() * cam.exposure_s * cam.qe_tlens;
}

}  // namespace navsim

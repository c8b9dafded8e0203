#include <doctest.h>

#include "navsim/camera.hpp"
#include "navsim/rng.hpp"

using namespace navsim;

TEST_CASE("boresight projects to the image center") {
  const CameraModel cam = build_intrinsics(deg2rad(20.0), 1024, 1024);
  const auto px = project(cam, Matrix3d::Identity(), Vector3d::UnitZ());
  REQUIRE(px.has_value());
  CHECK(px->x() == doctest::Approx(512.0));
  CHECK(px->y() == doctest::Approx(512.0));
}

TEST_CASE("the FoV edge maps to the image border") {
  const CameraModel cam = build_intrinsics(deg2rad(20.0), 1024, 768);
  // A ray at half the FoV from the boresight in the x-z plane.
  const double half = deg2rad(10.0);
  const Vector3d edge(std::sin(half), 0.0, std::cos(half));
  const auto px = project(cam, Matrix3d::Identity(), edge);
  REQUIRE(px.has_value());
  CHECK(px->x() == doctest::Approx(1024.0).epsilon(1e-12));
  CHECK(px->y() == doctest::Approx(384.0));
}

TEST_CASE("targets behind the camera do not project") {
  const CameraModel cam = build_intrinsics(deg2rad(20.0), 1024, 1024);
  CHECK(!project(cam, Matrix3d::Identity(), -Vector3d::UnitZ()).has_value());
  CHECK(!project(cam, Matrix3d::Identity(), Vector3d::UnitX()).has_value());
}

TEST_CASE("unproject inverts project for random attitudes and in-FoV rays") {
  const CameraModel cam = build_intrinsics(deg2rad(20.0), 1024, 1024);
  Rng rng(41);
  for (int it = 0; it < 200; ++it) {
    Quat q{rng.normal(), rng.normal3(1.0)};
    const Matrix3d a = q.normalized().to_dcm();
    // Random direction within the FoV cone, expressed in N through A^T.
    const double ang = rng.uniform(0.0, cam.fov / 2.0 * 0.95);
    const double roll = rng.uniform(0.0, 2.0 * M_PI);
    const Vector3d cam_ray(std::sin(ang) * std::cos(roll),
                           std::sin(ang) * std::sin(roll), std::cos(ang));
    const Vector3d los = a.transpose() * cam_ray;
    const auto px = project(cam, a, los);
    REQUIRE(px.has_value());
    const Vector3d back = unproject(cam, a, *px);
    CHECK((back - los).norm() < 1e-12);
  }
}

TEST_CASE("contains matches the pixel bounds") {
  const CameraModel cam = build_intrinsics(deg2rad(20.0), 100, 50);
  CHECK(cam.contains({0.0, 0.0}));
  CHECK(cam.contains({100.0, 50.0}));
  CHECK(!cam.contains({-0.1, 10.0}));
  CHECK(!cam.contains({10.0, 50.1}));
}

TEST_CASE("magnitude_to_electrons follows the Pogson scale") {
  const CameraModel cam = build_intrinsics(deg2rad(20.0), 1024, 1024);
  const double e0 = magnitude_to_electrons(cam, 0.0);
  CHECK(magnitude_to_electrons(cam, 5.0) == doctest::Approx(e0 / 100.0));
  CHECK(magnitude_to_electrons(cam, -2.5) == doctest::Approx(e0 * 10.0));
  CHECK(e0 > 0.0);
}

TEST_CASE("aperture area and pixel pitch are consistent with intrinsics") {
  const CameraModel cam = build_intrinsics(deg2rad(20.0), 1024, 1024, 40.0);
  const double d_m = (40.0 / cam.f_number) * 1e-3;
  CHECK(cam.aperture_area_m2() == doctest::Approx(M_PI * d_m * d_m / 4.0));
  CHECK(cam.pixel_pitch_mm() == doctest::Approx(40.0 / cam.focal_px()));
  CHECK(cam.focal_px() == doctest::Approx(512.0 / std::tan(deg2rad(10.0))));
}

TEST_CASE("intrinsics validation rejects degenerate configurations") {
  CHECK_THROWS_AS(build_intrinsics(0.0, 1024, 1024), ConfigError);
  CHECK_THROWS_AS(build_intrinsics(M_PI, 1024, 1024), ConfigError);
  CHECK_THROWS_AS(build_intrinsics(deg2rad(20.0), 0, 1024), ConfigError);
}

TEST_CASE("camera_from_json wires every field") {
  nlohmann::json j = {{"fov_deg", 20.0},      {"width_px", 1024},
                      {"height_px", 1024},    {"focal_mm", 40.0},
                      {"f_number", 2.2},      {"exposure_ms", 400.0},
                      {"qe_tlens", 0.49},     {"defocus_sigma_px", 0.5},
                      {"phi0_photons_m2_s", 1e9}};
  const CameraModel cam = camera_from_json(j);
  CHECK(cam.exposure_s == doctest::Approx(0.4));
  CHECK(cam.qe_tlens == 0.49);
  CHECK(cam.defocus_sigma_px == 0.5);
  CHECK(cam.phi0_photons_m2_s == 1e9);
}

#include <doctest.h>

#include "navsim/core.hpp"
#include "navsim/rng.hpp"

using namespace navsim;

TEST_CASE("angle unit conversions are mutually inverse") {
  CHECK(deg2rad(180.0) == doctest::Approx(M_PI));
  CHECK(rad2deg(deg2rad(37.25)) == doctest::Approx(37.25));
  CHECK(arcsec2rad(3600.0) == doctest::Approx(deg2rad(1.0)));
  CHECK(rad2arcsec(arcsec2rad(20.0)) == doctest::Approx(20.0));
}

TEST_CASE("jd_to_tdb_sec anchors at J2000 and scales by 86400") {
  CHECK(jd_to_tdb_sec(constants::kJ2000Jd) == 0.0);
  CHECK(jd_to_tdb_sec(constants::kJ2000Jd + 1.0) == doctest::Approx(86400.0));
  CHECK(jd_to_tdb_sec(constants::kJ2000Jd - 0.5) == doctest::Approx(-43200.0));
}

TEST_CASE("skew matrix reproduces the cross product and is antisymmetric") {
  Rng rng(11);
  for (int it = 0; it < 20; ++it) {
    const Vector3d a = rng.normal3(1.0), b = rng.normal3(1.0);
    CHECK((skew(a) * b - a.cross(b)).norm() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK((skew(a) + skew(a).transpose()).norm() == 0.0);
  }
}

TEST_CASE("quaternion to DCM produces proper orthonormal matrices") {
  Rng rng(12);
  for (int it = 0; it < 50; ++it) {
    Quat q{rng.normal(), rng.normal3(1.0)};
    q = q.normalized();
    const Matrix3d a = q.to_dcm();
    CHECK((a * a.transpose() - Matrix3d::Identity()).norm() ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK(a.determinant() == doctest::Approx(1.0));
  }
}

TEST_CASE("dcm_to_quat inverts to_dcm with positive scalar part") {
  Rng rng(13);
  for (int it = 0; it < 200; ++it) {
    Quat q{rng.normal(), rng.normal3(1.0)};
    q = q.normalized();
    const Quat r = dcm_to_quat(q.to_dcm());
    CHECK(r.q0 >= 0.0);
    // q and -q encode the same rotation.
    const double sign = q.q0 >= 0.0 ? 1.0 : -1.0;
    CHECK(std::abs(r.q0 - sign * q.q0) < 1e-12);
    CHECK((r.qv - sign * q.qv).norm() < 1e-12);
  }
}

TEST_CASE("dcm_to_quat handles near-180-degree rotations (all Shepperd branches)") {
  for (int axis = 0; axis < 3; ++axis) {
    const Matrix3d a =
        rotation_from_axis_angle(Vector3d::Unit(axis), M_PI - 1e-7);
    const Quat q = dcm_to_quat(a);
    CHECK((q.to_dcm() - a).norm() == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("quat_multiply composes the same way as DCM products") {
  Rng rng(14);
  for (int it = 0; it < 50; ++it) {
    Quat a{rng.normal(), rng.normal3(1.0)}, b{rng.normal(), rng.normal3(1.0)};
    a = a.normalized();
    b = b.normalized();
    const Matrix3d lhs = quat_multiply(a, b).to_dcm();
    const Matrix3d rhs = a.to_dcm() * b.to_dcm();
    CHECK((lhs - rhs).norm() == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("conjugate quaternion is the inverse rotation") {
  Rng rng(15);
  Quat q{rng.normal(), rng.normal3(1.0)};
  q = q.normalized();
  const Quat id = quat_multiply(q, q.conjugate());
  CHECK(id.q0 == doctest::Approx(1.0));
  CHECK(id.qv.norm() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("rotation_from_axis_angle matches Rodrigues on a known case") {
  // 90 degrees about z maps x to y.
  const Matrix3d r = rotation_from_axis_angle(Vector3d::UnitZ(), M_PI / 2.0);
  CHECK((r * Vector3d::UnitX() - Vector3d::UnitY()).norm() ==
        doctest::Approx(0.0).epsilon(1e-14));
  CHECK(rotation_from_axis_angle(Vector3d::UnitX(), 0.0)
            .isApprox(Matrix3d::Identity()));
}

TEST_CASE("rotation_angle_between recovers the constructed angle") {
  Rng rng(16);
  for (int it = 0; it < 50; ++it) {
    const Vector3d axis = rng.unit_vector();
    const double ang = rng.uniform(1e-6, M_PI - 1e-6);
    const Matrix3d a = rotation_from_axis_angle(axis, ang);
    CHECK(rotation_angle_between(a, Matrix3d::Identity()) ==
          doctest::Approx(ang).epsilon(1e-9));
  }
}

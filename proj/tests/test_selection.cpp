#include <doctest.h>

#include <limits>

#include "navsim/rng.hpp"
#include "navsim/selection.hpp"

using namespace navsim;

namespace {

EphemerisSet five_planet_set() {
  EphemerisSet set;
  const struct {
    PlanetId id;
    double a_km, e, i_deg, m0_deg;
  } rows[] = {
      {PlanetId::Venus, 1.082e8, 0.007, 3.4, 50.0},
      {PlanetId::EarthMoonBarycenter, 1.496e8, 0.017, 0.0, 357.0},
      {PlanetId::Mars, 2.279e8, 0.093, 1.85, 19.0},
      {PlanetId::Jupiter, 7.783e8, 0.048, 1.3, 20.0},
      {PlanetId::Saturn, 1.427e9, 0.054, 2.5, 317.0},
  };
  for (const auto& r : rows) {
    PlanetEphemeris eph;
    eph.planet_id = r.id;
    eph.elements = {r.a_km, r.e, deg2rad(r.i_deg), 0.0, 0.0, deg2rad(r.m0_deg),
                    0.0};
    set.add(eph);
  }
  return set;
}

}  // namespace

TEST_CASE("figure_of_merit is symmetric and quadratic in sigma") {
  Rng rng(51);
  for (int it = 0; it < 50; ++it) {
    const Vector3d r_i = rng.normal3(2e8), r_j = rng.normal3(2e8);
    const Vector3d r_sc = rng.normal3(1e8);
    const Vector3d rho_i = (r_i - r_sc).normalized();
    const Vector3d rho_j = (r_j - r_sc).normalized();
    const double j1 = figure_of_merit(rho_i, rho_j, r_i, r_j, 0.1);
    const double j2 = figure_of_merit(rho_j, rho_i, r_j, r_i, 0.1);
    CHECK(j1 == doctest::Approx(j2).epsilon(1e-12));
    CHECK(figure_of_merit(rho_i, rho_j, r_i, r_j, 0.2) ==
          doctest::Approx(4.0 * j1).epsilon(1e-12));
  }
}

TEST_CASE("collinear lines of sight are untriangulatable") {
  const Vector3d rho = Vector3d::UnitX();
  const double j = figure_of_merit(rho, rho, Vector3d(2e8, 0, 0),
                                   Vector3d(3e8, 0, 0), 0.1);
  CHECK(j == std::numeric_limits<double>::infinity());
  // Anti-parallel is equally degenerate.
  CHECK(figure_of_merit(rho, -rho, Vector3d(2e8, 0, 0), Vector3d(-3e8, 0, 0),
                        0.1) == std::numeric_limits<double>::infinity());
}

TEST_CASE("visible_planets applies the magnitude and solar-exclusion cuts") {
  const EphemerisSet set = five_planet_set();
  const Vector3d r_sc(1.2e8, 1.2e8, 0.0);
  VisibilityThresholds thr;
  thr.mag_limit = 7.0;
  thr.sea_min = deg2rad(20.0);
  const auto reports = visible_planets(0.0, r_sc, set, thr);
  REQUIRE(reports.size() == 5);
  const Vector3d sun_los = (-r_sc).normalized();
  for (const auto& rep : reports) {
    const auto [r_pl, v_pl] = set.planet_state(rep.planet_id, 0.0);
    const double sea = std::acos(std::clamp(
        (r_pl - r_sc).normalized().dot(sun_los), -1.0, 1.0));
    CHECK(rep.sea == doctest::Approx(sea).epsilon(1e-12));
    CHECK(rep.apparent_magnitude ==
          doctest::Approx(apparent_magnitude(rep.planet_id, r_pl, r_sc)));
    CHECK(rep.visible ==
          (rep.apparent_magnitude < thr.mag_limit && rep.sea > thr.sea_min));
  }
}

TEST_CASE("select_optimal_pair equals the exhaustive argmin for every visibility mask") {
  const EphemerisSet set = five_planet_set();
  const PlanetId ids[] = {PlanetId::Venus, PlanetId::EarthMoonBarycenter,
                          PlanetId::Mars, PlanetId::Jupiter, PlanetId::Saturn};
  Rng rng(52);
  const double sigma_str = 0.1;
  for (int trial = 0; trial < 4; ++trial) {
    const double t = trial * 2.0e7;
    const Vector3d r_sc = rng.normal3(1.5e8);
    for (int mask = 0; mask < 32; ++mask) {
      std::vector<VisibilityReport> reports;
      std::vector<PlanetId> vis;
      for (int b = 0; b < 5; ++b) {
        VisibilityReport rep;
        rep.planet_id = ids[b];
        rep.visible = (mask >> b) & 1;
        reports.push_back(rep);
        if (rep.visible) vis.push_back(ids[b]);
      }
      const auto got = select_optimal_pair(reports, t, r_sc, set, sigma_str);

      // Exhaustive argmin over the visible pairs, recomputed from scratch.
      std::optional<std::pair<PlanetId, PlanetId>> want;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < vis.size(); ++i) {
        for (std::size_t j = i + 1; j < vis.size(); ++j) {
          const Vector3d r_i = set.planet_state(vis[i], t).first;
          const Vector3d r_j = set.planet_state(vis[j], t).first;
          const double merit = figure_of_merit((r_i - r_sc).normalized(),
                                               (r_j - r_sc).normalized(), r_i,
                                               r_j, sigma_str);
          if (merit < best) {
            best = merit;
            want = {vis[i], vis[j]};
          }
        }
      }
      if (!std::isfinite(best)) want.reset();
      REQUIRE(got.has_value() == want.has_value());
      if (got) {
        CHECK(got->first == want->first);
        CHECK(got->second == want->second);
      }
    }
  }
}

TEST_CASE("fewer than two visible planets yields no pair") {
  const EphemerisSet set = five_planet_set();
  std::vector<VisibilityReport> reports(5);
  reports[2].planet_id = PlanetId::Mars;
  reports[2].visible = true;
  CHECK(!select_optimal_pair(reports, 0.0, Vector3d(1e8, 0, 0), set, 0.1)
             .has_value());
}

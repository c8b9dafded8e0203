#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "navsim/kvector.hpp"
#include "navsim/rng.hpp"
#include "navsim/star_catalog.hpp"

using namespace navsim;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("radec_to_unit maps cardinal directions correctly") {
  CHECK((radec_to_unit(0.0, 0.0) - Vector3d::UnitX()).norm() < 1e-15);
  CHECK((radec_to_unit(M_PI / 2.0, 0.0) - Vector3d::UnitY()).norm() < 1e-15);
  CHECK((radec_to_unit(0.0, M_PI / 2.0) - Vector3d::UnitZ()).norm() < 1e-12);
}

TEST_CASE("catalog CSV save/load round trip preserves stars") {
  Rng rng(31);
  std::vector<StarRecord> catalog;
  for (int i = 0; i < 50; ++i) {
    StarRecord s;
    s.star_id = 100 + i;
    s.los_inertial = rng.unit_vector();
    s.magnitude = rng.uniform(-1.0, 7.0);
    catalog.push_back(s);
  }
  const std::string path = temp_path("navsim_cat_roundtrip.csv");
  save_star_catalog(catalog, path);
  const auto loaded = load_star_catalog(path);
  REQUIRE(loaded.size() == catalog.size());
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    CHECK(loaded[i].star_id == catalog[i].star_id);
    CHECK((loaded[i].los_inertial - catalog[i].los_inertial).norm() < 1e-9);
    CHECK(loaded[i].magnitude == doctest::Approx(catalog[i].magnitude).epsilon(1e-3));
  }
  std::remove(path.c_str());
}

TEST_CASE("loader rejects duplicates and malformed rows") {
  const std::string path = temp_path("navsim_cat_bad.csv");
  {
    std::ofstream out(path);
    out << "star_id,ra_deg,dec_deg,vmag\n1,10.0,20.0,3.0\n1,11.0,21.0,4.0\n";
  }
  CHECK_THROWS_AS(load_star_catalog(path), ConfigError);
  {
    std::ofstream out(path);
    out << "star_id,ra_deg,dec_deg,vmag\n1,10.0,not_a_number,3.0\n";
  }
  CHECK_THROWS_AS(load_star_catalog(path), ConfigError);
  {
    std::ofstream out(path);
    out << "star_id,ra_deg,dec_deg,vmag\n1,10.0,20.0\n";
  }
  CHECK_THROWS_AS(load_star_catalog(path), ConfigError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_star_catalog(temp_path("navsim_no_such_file.csv")),
                  ConfigError);
}

TEST_CASE("synthetic catalog respects count, seed determinism, and mag cap") {
  const auto a = generate_synthetic_catalog(99, 500, 6.0);
  const auto b = generate_synthetic_catalog(99, 500, 6.0);
  REQUIRE(a.size() == 500);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].star_id == static_cast<int>(i) + 1);
    CHECK((a[i].los_inertial - b[i].los_inertial).norm() == 0.0);
    CHECK(a[i].magnitude <= 6.0 + 1e-12);
    CHECK(a[i].magnitude >= -1.0 - 1e-12);
  }
}

TEST_CASE("k-vector pair table matches a brute-force pair scan") {
  const auto catalog = generate_synthetic_catalog(7, 400, 6.0);
  const double mag_limit = 5.5, max_angle = deg2rad(35.0);
  const KVectorCatalog kv = build_kvector(catalog, mag_limit, max_angle);

  // Independent oracle: O(n^2) scan with the same cuts.
  std::vector<StarPair> brute;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    if (catalog[i].magnitude > mag_limit) continue;
    for (std::size_t j = i + 1; j < catalog.size(); ++j) {
      if (catalog[j].magnitude > mag_limit) continue;
      const double ang = std::acos(std::clamp(
          catalog[i].los_inertial.dot(catalog[j].los_inertial), -1.0, 1.0));
      if (ang > max_angle) continue;
      brute.push_back({ang, std::min(catalog[i].star_id, catalog[j].star_id),
                       std::max(catalog[i].star_id, catalog[j].star_id)});
    }
  }
  REQUIRE(kv.pairs.size() == brute.size());
  std::sort(brute.begin(), brute.end(),
            [](const StarPair& a, const StarPair& b) { return a.angle < b.angle; });
  for (std::size_t i = 0; i < brute.size(); ++i)
    CHECK(kv.pairs[i].angle == doctest::Approx(brute[i].angle).epsilon(1e-14));
  CHECK(std::is_sorted(kv.pairs.begin(), kv.pairs.end(),
                       [](const StarPair& a, const StarPair& b) {
                         return a.angle < b.angle;
                       }));
}

TEST_CASE("range_query equals a binary-search oracle on random queries") {
  const auto catalog = generate_synthetic_catalog(8, 600, 6.0);
  const KVectorCatalog kv = build_kvector(catalog, 6.0);
  REQUIRE(!kv.empty());
  Rng rng(32);
  for (int it = 0; it < 2000; ++it) {
    const double q = rng.uniform(0.0, kv.max_angle * 1.1);
    const double tol = rng.uniform(1e-6, 5e-3);
    const auto got = kv.range_query(q, tol);

    // Oracle: std::lower_bound / upper_bound over the sorted table.
    const auto lo = std::lower_bound(
        kv.pairs.begin(), kv.pairs.end(), q - tol,
        [](const StarPair& p, double v) { return p.angle < v; });
    const auto hi = std::upper_bound(
        kv.pairs.begin(), kv.pairs.end(), q + tol,
        [](double v, const StarPair& p) { return v < p.angle; });
    REQUIRE(static_cast<std::ptrdiff_t>(got.size()) == hi - lo);
    for (std::ptrdiff_t i = 0; i < hi - lo; ++i) {
      CHECK(got[i].star_id_a == (lo + i)->star_id_a);
      CHECK(got[i].star_id_b == (lo + i)->star_id_b);
    }
  }
}

TEST_CASE("range_query edge cases: empty table, zero tolerance, out of range") {
  KVectorCatalog empty;
  CHECK(empty.range_query(0.1, 1e-3).empty());
  const auto catalog = generate_synthetic_catalog(9, 200, 6.0);
  const KVectorCatalog kv = build_kvector(catalog, 6.0);
  CHECK(kv.range_query(0.1, 0.0).empty());
  CHECK(kv.range_query(kv.max_angle + 1.0, 1e-3).empty());
}

TEST_CASE("k_vector index array is monotone and counts all pairs") {
  const auto catalog = generate_synthetic_catalog(10, 300, 6.0);
  const KVectorCatalog kv = build_kvector(catalog, 6.0);
  REQUIRE(kv.k_vector.size() == kv.pairs.size() + 1);
  for (std::size_t j = 1; j < kv.k_vector.size(); ++j)
    CHECK(kv.k_vector[j] >= kv.k_vector[j - 1]);
  CHECK(kv.k_vector.back() == kv.pairs.size());
}

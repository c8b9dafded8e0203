// kvector.hpp - sorted interstar-angle pair table with k-vector range index.
//
// The k-vector is the integer index over the sorted invariant table that lets
// a range query land on the answer with index arithmetic plus a local trim,
// instead of a binary search or a linear scan.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "navsim/core.hpp"
#include "navsim/star_catalog.hpp"

namespace navsim {

struct StarPair {
  double angle = 0.0;  // rad
  int star_id_a = 0;
  int star_id_b = 0;
};

class KVectorCatalog {
 public:
  std::vector<StarPair> pairs;       // sorted ascending by angle
  std::vector<std::uint32_t> k_vector;  // monotone index array, size n+1
  double mag_limit = 5.5;
  double max_angle = deg2rad(35.0);

  // Linear fit z(j) = slope * j + intercept through the angle extremes.
  double slope = 0.0;
  double intercept = 0.0;

  bool empty() const { return pairs.empty(); }

  // All stored pairs with |angle - query| <= tol.
  std::vector<StarPair> range_query(double angle, double tol) const {
    std::vector<StarPair> out;
    if (pairs.empty() || tol <= 0.0) return out;
    const double lo = angle - tol, hi = angle + tol;
    const auto n = static_cast<std::int64_t>(pairs.size());

    // Index bin straddling a value z: j such that z(j) <= z < z(j+1).
    auto bin_of = [&](double z) -> std::int64_t {
      if (slope <= 0.0) return 0;
      const auto j = static_cast<std::int64_t>(std::floor((z - intercept) / slope));
      return std::clamp<std::int64_t>(j, 0, n - 1);
    };
    // k_vector[j] = number of pairs with angle <= z(j); the true start/end
    // lie within one bin of the fit, trimmed locally.
    std::int64_t start = static_cast<std::int64_t>(k_vector[bin_of(lo)]);
    std::int64_t end = static_cast<std::int64_t>(k_vector[bin_of(hi) + 1]);
    while (start > 0 && pairs[start - 1].angle >= lo) --start;
    while (start < n && pairs[start].angle < lo) ++start;
    while (end < n && pairs[end].angle <= hi) ++end;
    while (end > start && pairs[end - 1].angle > hi) --end;
    out.assign(pairs.begin() + start, pairs.begin() + end);
    return out;
  }
};

inline KVectorCatalog build_kvector(const std::vector<StarRecord>& catalog,
                                    double mag_limit = 5.5,
                                    double max_angle = deg2rad(35.0)) {
  KVectorCatalog kv;
  kv.mag_limit = mag_limit;
  kv.max_angle = max_angle;

  const double cos_max = std::cos(max_angle);
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    if (catalog[i].magnitude > mag_limit) continue;
    for (std::size_t j = i + 1; j < catalog.size(); ++j) {
      if (catalog[j].magnitude > mag_limit) continue;
      const double c = catalog[i].los_inertial.dot(catalog[j].los_inertial);
      if (c < cos_max) continue;
      StarPair p;
      p.angle = std::acos(std::clamp(c, -1.0, 1.0));
      p.star_id_a = std::min(catalog[i].star_id, catalog[j].star_id);
      p.star_id_b = std::max(catalog[i].star_id, catalog[j].star_id);
      kv.pairs.push_back(p);
    }
  }
  std::sort(kv.pairs.begin(), kv.pairs.end(),
            [](const StarPair& a, const StarPair& b) {
              if (a.angle != b.angle) return a.angle < b.angle;
              if (a.star_id_a != b.star_id_a) return a.star_id_a < b.star_id_a;
              return a.star_id_b < b.star_id_b;
            });

  const auto n = kv.pairs.size();
  kv.k_vector.assign(n + 1, 0);
  if (n == 0) return kv;
  const double a_min = kv.pairs.front().angle;
  const double a_max = kv.pairs.back().angle;
  // Guard band keeps every stored angle strictly inside the fitted line.
  const double eps = std::max(1e-12, (a_max - a_min) * 1e-12);
  kv.slope = (a_max - a_min + 2.0 * eps) / static_cast<double>(n);
  kv.intercept = a_min - eps;
  std::size_t cursor = 0;
  for (std::size_t j = 0; j <= n; ++j) {
    const double z = kv.intercept + kv.slope * static_cast<double>(j);
    while (cursor < n && kv.pairs[cursor].angle <= z) ++cursor;
    kv.k_vector[j] = static_cast<std::uint32_t>(cursor);
  }
  kv.k_vector[n] = static_cast<std::uint32_t>(n);
  return kv;
}

}  // namespace navsim

// star_catalog.hpp - onboard star catalog.
//
// CSV schema: header `star_id,ra_deg,dec_deg,vmag`, angles in degrees.
// Stars are fixed in the inertial frame; no proper motion or parallax.
#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "navsim/core.hpp"
#include "navsim/rng.hpp"

namespace navsim {

struct StarRecord {
  int star_id = 0;
  Vector3d los_inertial = Vector3d::UnitX();  // unit vector, frame N
  double magnitude = 0.0;
};

inline Vector3d radec_to_unit(double ra_rad, double dec_rad) {
  const double cd = std::cos(dec_rad);
  return Vector3d(cd * std::cos(ra_rad), cd * std::sin(ra_rad),
                  std::sin(dec_rad));
}

inline std::vector<StarRecord> load_star_catalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open star catalog: " + path);
  std::vector<StarRecord> catalog;
  std::unordered_set<int> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    if (line_no == 1 && line.rfind("star_id", 0) == 0) continue;
    std::istringstream ss(line);
    std::string field;
    double vals[4];
    for (int i = 0; i < 4; ++i) {
      if (!std::getline(ss, field, ',')) {
        throw ConfigError(path + ":" + std::to_string(line_no) +
                          ": malformed star record (expected 4 fields)");
      }
      try {
        vals[i] = std::stod(field);
      } catch (const std::exception&) {
        throw ConfigError(path + ":" + std::to_string(line_no) +
                          ": malformed numeric field '" + field + "'");
      }
    }
    StarRecord rec;
    rec.star_id = static_cast<int>(vals[0]);
    rec.los_inertial = radec_to_unit(deg2rad(vals[1]), deg2rad(vals[2]));
    rec.magnitude = vals[3];
    if (!seen.insert(rec.star_id).second) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": duplicate star_id " + std::to_string(rec.star_id));
    }
    if (std::abs(rec.los_inertial.norm() - 1.0) > 1e-12) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": line of sight is not unit norm");
    }
    catalog.push_back(rec);
  }
  return catalog;
}

inline void save_star_catalog(const std::vector<StarRecord>& catalog,
                              const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write star catalog: " + path);
  out << "star_id,ra_deg,dec_deg,vmag\n";
  char buf[128];
  for (const StarRecord& s : catalog) {
    const double dec = std::asin(std::clamp(s.los_inertial.z(), -1.0, 1.0));
    double ra = std::atan2(s.los_inertial.y(), s.los_inertial.x());
    if (ra < 0.0) ra += 2.0 * M_PI;
    std::snprintf(buf, sizeof(buf), "%d,%.10f,%.10f,%.4f\n", s.star_id,
                  rad2deg(ra), rad2deg(dec), s.magnitude);
    out << buf;
  }
}

// Synthetic whole-sky catalog: uniform directions, magnitudes following the
// empirical bright-star count law N(<m) ~ 10^(0.51 m).
inline std::vector<StarRecord> generate_synthetic_catalog(std::uint64_t seed,
                                                          int count,
                                                          double mag_max = 6.0) {
  Rng rng(seed);
  std::vector<StarRecord> catalog;
  catalog.reserve(count);
  const double k = 0.51;
  const double norm = std::pow(10.0, k * mag_max);
  for (int i = 0; i < count; ++i) {
    StarRecord rec;
    rec.star_id = i + 1;
    rec.los_inertial = rng.unit_vector();
    // Inverse-CDF sample of the cumulative count law, clipped at mag -1.
    const double u = std::max(rng.uniform(), std::pow(10.0, k * (-1.0)) / norm);
    rec.magnitude = std::log10(u * norm) / k;
    catalog.push_back(rec);
  }
  return catalog;
}

}  // namespace navsim

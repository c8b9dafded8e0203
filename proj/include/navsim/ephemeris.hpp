// ephemeris.hpp - Keplerian planet ephemerides.
//
// Elements are mean heliocentric elements at a reference epoch, supplied as
// configuration data (JSON). Two-body propagation stands in for onboard
// ephemerides; the filter assumes the planet positions are exact.
#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "navsim/core.hpp"

namespace navsim {

enum class PlanetId { Venus, EarthMoonBarycenter, Mars, Jupiter, Saturn };

inline const char* planet_name(PlanetId id) {
  switch (id) {
    case PlanetId::Venus: return "Venus";
    case PlanetId::EarthMoonBarycenter: return "EarthMoonBarycenter";
    case PlanetId::Mars: return "Mars";
    case PlanetId::Jupiter: return "Jupiter";
    case PlanetId::Saturn: return "Saturn";
  }
  return "?";
}

inline std::optional<PlanetId> planet_from_name(const std::string& name) {
  if (name == "Venus") return PlanetId::Venus;
  if (name == "EarthMoonBarycenter" || name == "EMB")
    return PlanetId::EarthMoonBarycenter;
  if (name == "Mars") return PlanetId::Mars;
  if (name == "Jupiter") return PlanetId::Jupiter;
  if (name == "Saturn") return PlanetId::Saturn;
  return std::nullopt;
}

// Standard gravitational parameters, km^3/s^2.
inline double planet_mu(PlanetId id) {
  switch (id) {
    case PlanetId::Venus: return 3.24858592e5;
    case PlanetId::EarthMoonBarycenter: return 4.0350323550e5;
    case PlanetId::Mars: return 4.282837e4;
    case PlanetId::Jupiter: return 1.26686534e8;
    case PlanetId::Saturn: return 3.7931187e7;
  }
  return 0.0;
}

struct KeplerianElements {
  double a_km = 0.0;
  double e = 0.0;
  double i_rad = 0.0;
  double raan_rad = 0.0;
  double argp_rad = 0.0;
  double m0_rad = 0.0;
  double epoch_tdb_s = 0.0;  // seconds past J2000
};

// Solves M = E - e sin E by Newton iteration with a bisection safeguard.
// f(E) = E - e sin E - M is monotone on [-pi, pi] for e < 1, so the bracket
// always contains the root; any Newton step that leaves it (which plain
// Newton does for e near 1 and M near +-pi) falls back to bisection.
inline double solve_kepler(double mean_anomaly, double e) {
  const double m = std::remainder(mean_anomaly, 2.0 * M_PI);
  double lo = -M_PI, hi = M_PI;
  double big_e = (e < 0.8) ? m : std::copysign(M_PI, m);
  for (int it = 0; it < 100; ++it) {
    const double f = big_e - e * std::sin(big_e) - m;
    if (f > 0.0)
      hi = big_e;
    else
      lo = big_e;
    const double fp = 1.0 - e * std::cos(big_e);
    const double de = f / fp;
    double next = big_e - de;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - big_e) < 1e-14) return next;
    big_e = next;
  }
  return big_e;
}

struct PlanetEphemeris {
  PlanetId planet_id = PlanetId::EarthMoonBarycenter;
  KeplerianElements elements;
  double mu_parent = constants::kMuSun;

  void validate() const {
    if (!(elements.a_km > 0.0))
      throw ConfigError(std::string(planet_name(planet_id)) + ": a must be > 0");
    if (!(elements.e >= 0.0 && elements.e < 1.0))
      throw ConfigError(std::string(planet_name(planet_id)) +
                        ": e must be in [0, 1)");
  }

  // Position (km) and velocity (km/s) in frame N at t seconds past J2000.
  std::pair<Vector3d, Vector3d> state(double t) const {
    const KeplerianElements& el = elements;
    const double n = std::sqrt(mu_parent / (el.a_km * el.a_km * el.a_km));
    const double m = el.m0_rad + n * (t - el.epoch_tdb_s);
    const double big_e = solve_kepler(m, el.e);
    const double ce = std::cos(big_e), se = std::sin(big_e);
    const double sq = std::sqrt(1.0 - el.e * el.e);
    // Perifocal coordinates.
    const double xp = el.a_km * (ce - el.e);
    const double yp = el.a_km * sq * se;
    const double r = el.a_km * (1.0 - el.e * ce);
    const double vxp = -el.a_km * n * se * el.a_km / r;
    const double vyp = el.a_km * n * sq * ce * el.a_km / r;

    const double cO = std::cos(el.raan_rad), sO = std::sin(el.raan_rad);
    const double ci = std::cos(el.i_rad), si = std::sin(el.i_rad);
    const double cw = std::cos(el.argp_rad), sw = std::sin(el.argp_rad);
    Matrix3d rot;
    rot << cO * cw - sO * sw * ci, -cO * sw - sO * cw * ci, sO * si,
        sO * cw + cO * sw * ci, -sO * sw + cO * cw * ci, -cO * si,
        sw * si, cw * si, ci;
    return {rot * Vector3d(xp, yp, 0.0), rot * Vector3d(vxp, vyp, 0.0)};
  }

  double period() const {
    return 2.0 * M_PI *
           std::sqrt(elements.a_km * elements.a_km * elements.a_km / mu_parent);
  }
};

// The set of planets known to the simulation, with a validity window on t.
class EphemerisSet {
 public:
  EphemerisSet() = default;

  void add(PlanetEphemeris eph) {
    eph.validate();
    bodies_[eph.planet_id] = std::move(eph);
  }

  void set_validity_window(double t_min, double t_max) {
    t_min_ = t_min;
    t_max_ = t_max;
  }

  bool has(PlanetId id) const { return bodies_.count(id) > 0; }

  const std::map<PlanetId, PlanetEphemeris>& bodies() const { return bodies_; }

  std::pair<Vector3d, Vector3d> planet_state(PlanetId id, double t) const {
    const auto it = bodies_.find(id);
    if (it == bodies_.end())
      throw std::out_of_range(std::string("unknown planet id: ") +
                              planet_name(id));
    if (t < t_min_ || t > t_max_)
      throw std::out_of_range("ephemeris time outside validity window");
    return it->second.state(t);
  }

  static EphemerisSet from_json(const nlohmann::json& j) {
    EphemerisSet set;
    for (const auto& [name, body] : j.items()) {
      const auto id = planet_from_name(name);
      if (!id) throw ConfigError("unknown planet name in ephemeris config: " + name);
      PlanetEphemeris eph;
      eph.planet_id = *id;
      eph.elements.a_km = body.at("a_km").get<double>();
      eph.elements.e = body.at("e").get<double>();
      eph.elements.i_rad = deg2rad(body.at("i_deg").get<double>());
      eph.elements.raan_rad = deg2rad(body.at("raan_deg").get<double>());
      eph.elements.argp_rad = deg2rad(body.at("argp_deg").get<double>());
      eph.elements.m0_rad = deg2rad(body.at("m0_deg").get<double>());
      eph.elements.epoch_tdb_s = jd_to_tdb_sec(body.at("epoch_jd_tdb").get<double>());
      set.add(std::move(eph));
    }
    return set;
  }

  static EphemerisSet load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open ephemeris config: " + path);
    nlohmann::json j;
    in >> j;
    return from_json(j);
  }

 private:
  std::map<PlanetId, PlanetEphemeris> bodies_;
  double t_min_ = -std::numeric_limits<double>::infinity();
  double t_max_ = std::numeric_limits<double>::infinity();
};

}  // namespace navsim

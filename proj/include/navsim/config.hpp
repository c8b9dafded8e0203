// config.hpp - scenario configuration: one JSON file wiring every module.
//
// File references (star catalog, ephemeris) resolve relative to the config
// file's directory. The loaded object keeps a fully resolved JSON echo for
// reproducibility dumps.
#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include <json.hpp>

#include "navsim/camera.hpp"
#include "navsim/core.hpp"
#include "navsim/dynamics.hpp"
#include "navsim/ephemeris.hpp"
#include "navsim/image_processing.hpp"
#include "navsim/navigation.hpp"
#include "navsim/scene.hpp"
#include "navsim/selection.hpp"
#include "navsim/star_catalog.hpp"

namespace navsim {

struct ScheduleConfig {
  int legs = 3;
  double track_duration_s = 3600.0;
  double meas_period_s = 100.0;
  double slew_duration_s = 1800.0;
  double coast_duration_s = 10.0 * 86400.0;
  double coast_checkpoint_s = 86400.0;

  void validate() const {
    if (legs <= 0 || track_duration_s <= 0 || meas_period_s <= 0 ||
        slew_duration_s <= 0 || coast_duration_s <= 0 ||
        coast_checkpoint_s <= 0)
      throw ConfigError("schedule fields must be positive");
  }
};

struct FilterConfig {
  double sigma_str_px = 0.1;
  double gate_k = 3.0;
  double sigma_r_km = 1e4;       // initial position std per axis
  double sigma_v_kms = 0.1;      // initial velocity std per axis
  double sigma_eta_kms2 = 1e-10; // initial Gauss-Markov std per axis
};

struct IpCampaignConfig {
  int scenes = 300;
  double sigma_xy_au = 3.0;   // pose sampling, in-plane
  double sigma_z_au = 0.07;   // pose sampling, out-of-plane
  double sigma_r_km = 1e5;    // position knowledge fed to planet ID
  std::vector<double> sigma_r_levels = {1e4, 1e5, 1e6, 1e7};
  double pointing_offset_frac = 0.3;  // boresight offset, fraction of FoV
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  int samples = 10;
  int case_mode = 1;
  double epoch_jd_tdb = constants::kJ2000Jd;

  std::vector<StarRecord> catalog;
  std::shared_ptr<EphemerisSet> ephemerides;
  CameraModel camera;
  NoiseConfig noise;
  DynamicsParams dyn_filter;
  DynamicsParams dyn_truth;
  bool truth_gauss_markov = true;

  FilterConfig filter;
  VisibilityThresholds visibility;
  double selection_sigma_str = 0.1;
  ScheduleConfig schedule;
  CentroidingOptions centroiding;
  StarIdOptions star_id;
  double star_id_mag_limit = 5.5;
  IpCampaignConfig ip;

  Vector3d r0_km = Vector3d::Zero();
  Vector3d v0_kms = Vector3d::Zero();

  nlohmann::json echo;  // resolved configuration

  double epoch_s() const { return jd_to_tdb_sec(epoch_jd_tdb); }
};

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": JSON parse error: " + e.what());
  }
  const auto base = std::filesystem::path(path).parent_path();
  const auto resolve = [&](const std::string& p) {
    const std::filesystem::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).string();
  };

  ScenarioConfig cfg;
  try {
    cfg.seed = j.value("seed", 1ULL);
    cfg.samples = j.value("samples", 10);
    cfg.case_mode = j.value("case_mode", 1);
    if (cfg.case_mode < 1 || cfg.case_mode > 5)
      throw ConfigError("case_mode must be in [1, 5]");
    if (cfg.samples <= 0) throw ConfigError("samples must be positive");
    cfg.epoch_jd_tdb = j.at("epoch_jd_tdb").get<double>();

    // Star catalog: file path or synthetic generator block.
    if (j.contains("star_catalog")) {
      const std::string cat_path = resolve(j.at("star_catalog").get<std::string>());
      cfg.catalog = load_star_catalog(cat_path);
      j["star_catalog"] = cat_path;
    } else {
      const auto& sc = j.at("synthetic_catalog");
      cfg.catalog = generate_synthetic_catalog(
          sc.at("seed").get<std::uint64_t>(), sc.at("count").get<int>(),
          sc.value("mag_max", 6.0));
    }

    // Ephemerides: inline object or file reference.
    cfg.ephemerides = std::make_shared<EphemerisSet>();
    if (j.at("ephemeris").is_string()) {
      const std::string eph_path = resolve(j.at("ephemeris").get<std::string>());
      *cfg.ephemerides = EphemerisSet::load(eph_path);
      j["ephemeris"] = eph_path;
    } else {
      *cfg.ephemerides = EphemerisSet::from_json(j.at("ephemeris"));
    }

    cfg.camera = camera_from_json(j.at("camera"));
    cfg.noise = noise_from_json(j.at("noise"));
    cfg.dyn_filter =
        dynamics_from_json(j.at("dynamics"), cfg.ephemerides.get());
    cfg.dyn_truth = dynamics_from_json(j.at("dynamics"), cfg.ephemerides.get(),
                                       "truth_third_bodies");
    cfg.truth_gauss_markov =
        j.at("dynamics").value("truth_gauss_markov", true);

    if (j.contains("filter")) {
      const auto& f = j.at("filter");
      cfg.filter.sigma_str_px = f.value("sigma_str_px", 0.1);
      cfg.filter.gate_k = f.value("gate_k", 3.0);
      cfg.filter.sigma_r_km = f.value("sigma_r_km", 1e4);
      cfg.filter.sigma_v_kms = f.value("sigma_v_kms", 0.1);
      cfg.filter.sigma_eta_kms2 = f.value("sigma_eta_kms2", 1e-10);
    }
    if (j.contains("selection")) {
      const auto& s = j.at("selection");
      cfg.visibility.mag_limit = s.value("mag_limit", 7.0);
      cfg.visibility.sea_min = deg2rad(s.value("sea_min_deg", 20.0));
      cfg.selection_sigma_str = s.value("sigma_str_px", 0.1);
    }
    if (j.contains("schedule")) {
      const auto& s = j.at("schedule");
      cfg.schedule.legs = s.value("legs", 3);
      cfg.schedule.track_duration_s = s.value("track_duration_s", 3600.0);
      cfg.schedule.meas_period_s = s.value("meas_period_s", 100.0);
      cfg.schedule.slew_duration_s = s.value("slew_duration_s", 1800.0);
      cfg.schedule.coast_duration_s =
          s.value("coast_duration_s", 10.0 * 86400.0);
      cfg.schedule.coast_checkpoint_s = s.value("coast_checkpoint_s", 86400.0);
    }
    cfg.schedule.validate();
    if (j.contains("image_processing")) {
      const auto& ip = j.at("image_processing");
      cfg.centroiding.k_niblack = ip.value("k_niblack", CentroidingOptions{}.k_niblack);
      cfg.centroiding.k_peak = ip.value("k_peak", CentroidingOptions{}.k_peak);
      cfg.centroiding.window_half = ip.value("window_half", 7);
      cfg.star_id.pair_tolerance =
          arcsec2rad(ip.value("pair_tolerance_arcsec", 60.0));
      cfg.star_id.ransac_iterations = ip.value("ransac_iterations", 32);
      cfg.star_id.recursive_gate_px = ip.value("recursive_gate_px", 10.0);
      cfg.star_id_mag_limit = ip.value("star_mag_limit", 5.5);
    }
    cfg.centroiding.saturation_e = cfg.noise.full_well_e;
    if (j.contains("ip_campaign")) {
      const auto& ip = j.at("ip_campaign");
      cfg.ip.scenes = ip.value("scenes", 300);
      cfg.ip.sigma_xy_au = ip.value("sigma_xy_au", 3.0);
      cfg.ip.sigma_z_au = ip.value("sigma_z_au", 0.07);
      cfg.ip.sigma_r_km = ip.value("sigma_r_km", 1e5);
      if (ip.contains("sigma_r_levels"))
        cfg.ip.sigma_r_levels =
            ip.at("sigma_r_levels").get<std::vector<double>>();
      cfg.ip.pointing_offset_frac = ip.value("pointing_offset_frac", 0.3);
    }

    const auto& init = j.at("initial_state");
    for (int i = 0; i < 3; ++i) {
      cfg.r0_km[i] = init.at("r_km").at(i).get<double>();
      cfg.v0_kms[i] = init.at("v_kms").at(i).get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }

  cfg.echo = std::move(j);
  return cfg;
}

inline FilterParams filter_params(const ScenarioConfig& cfg) {
  FilterParams p;
  p.sigma_px = cfg.filter.sigma_str_px;
  p.gate_k = cfg.filter.gate_k;
  return p;
}

inline State12 initial_sigma12(const ScenarioConfig& cfg) {
  State12 s;
  s.segment<3>(0).setConstant(cfg.filter.sigma_r_km);
  s.segment<3>(3).setConstant(cfg.filter.sigma_v_kms);
  s.segment<6>(6).setConstant(cfg.filter.sigma_eta_kms2);
  return s;
}

}  // namespace navsim

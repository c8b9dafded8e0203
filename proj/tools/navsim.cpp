// navsim - vision-based deep-space navigation simulator CLI.
//
// Subcommands: ip-campaign, filter-campaign, render-one, gen-catalog.
// Exit codes: 0 success, 2 configuration error, 3 runtime failure.
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "navsim/campaign.hpp"
#include "navsim/config.hpp"

namespace {

struct Overrides {
  std::optional<int> samples;
  std::optional<std::uint64_t> seed;
  std::optional<double> sigma_r;
  std::optional<int> case_mode;
  std::optional<int> legs;
};

navsim::ScenarioConfig load_with_overrides(const std::string& config_path,
                                           const Overrides& ov) {
  navsim::ScenarioConfig cfg = navsim::load_scenario(config_path);
  if (ov.seed) {
    cfg.seed = *ov.seed;
    cfg.echo["seed"] = *ov.seed;
  }
  if (ov.samples) {
    if (*ov.samples <= 0) throw navsim::ConfigError("samples must be positive");
    cfg.samples = *ov.samples;
    cfg.echo["samples"] = *ov.samples;
    cfg.ip.scenes = *ov.samples;  // ip-campaign: samples are scenes
  }
  if (ov.sigma_r) {
    cfg.ip.sigma_r_km = *ov.sigma_r;
    cfg.echo["ip_campaign"]["sigma_r_km"] = *ov.sigma_r;
  }
  if (ov.case_mode) {
    if (*ov.case_mode < 1 || *ov.case_mode > 5)
      throw navsim::ConfigError("case must be in [1, 5]");
    cfg.case_mode = *ov.case_mode;
    cfg.echo["case_mode"] = *ov.case_mode;
  }
  if (ov.legs) {
    if (*ov.legs <= 0) throw navsim::ConfigError("legs must be positive");
    cfg.schedule.legs = *ov.legs;
    cfg.echo["schedule"]["legs"] = *ov.legs;
  }
  return cfg;
}

int run_render_one(const std::string& config_path, double epoch_jd,
                   const std::string& out_path) {
  using namespace navsim;
  ScenarioConfig cfg = load_scenario(config_path);
  const double t0 = cfg.epoch_s();
  const double t = jd_to_tdb_sec(epoch_jd);
  const ScaleSet scales = ScaleSet::standard(t0, cfg.dyn_truth.mu);

  Vector3d r = cfg.r0_km, v = cfg.v0_kms;
  State12 gm = State12::Zero();
  if (t > t0) propagate_truth(r, v, gm, t0, t, cfg.dyn_truth, scales, nullptr);

  // Point at the brightest visible planet; fall back to the +x sky.
  Rng rng(cfg.seed);
  Vector3d target_los = Vector3d::UnitX();
  const auto reports = visible_planets(t, r, *cfg.ephemerides, cfg.visibility);
  double best_mag = 1e9;
  for (const auto& rep : reports) {
    if (!rep.visible || rep.apparent_magnitude >= best_mag) continue;
    best_mag = rep.apparent_magnitude;
    double dt = 0.0;
    const Vector3d r_emit = emission_position_iterative(
        *cfg.ephemerides, rep.planet_id, t, r, &dt);
    target_los = aberrate_los((r_emit - r).normalized(), v);
  }
  const Quat q = true_attitude(target_los, cfg.noise, rng);
  auto [img, truth] =
      render(r, v, q, t, cfg.catalog, *cfg.ephemerides, cfg.camera, cfg.noise,
             rng);
  write_pgm(img, cfg.noise, out_path);
  std::ofstream side(out_path + ".json");
  if (!side) throw std::runtime_error("cannot write sidecar for " + out_path);
  side << ground_truth_to_json(truth).dump(2) << "\n";
  std::cout << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vision-based deep-space navigation simulator"};
  app.require_subcommand(1);

  Overrides ov;
  std::string config_path, out_dir, out_path;
  double epoch_jd = 0.0;
  std::uint64_t gen_seed = 1;
  int gen_count = 4000;
  double gen_mag_max = 6.0;

  auto* ip = app.add_subcommand("ip-campaign", "image-processing Monte Carlo");
  ip->add_option("--config", config_path)->required();
  ip->add_option("--out", out_dir)->required();
  ip->add_option("--samples", ov.samples);
  ip->add_option("--seed", ov.seed);
  ip->add_option("--sigma-r", ov.sigma_r);

  auto* fc = app.add_subcommand("filter-campaign", "full-filter Monte Carlo");
  fc->add_option("--config", config_path)->required();
  fc->add_option("--out", out_dir)->required();
  fc->add_option("--case", ov.case_mode);
  fc->add_option("--legs", ov.legs);
  fc->add_option("--samples", ov.samples);
  fc->add_option("--seed", ov.seed);

  auto* ro = app.add_subcommand("render-one", "render a single image");
  ro->add_option("--config", config_path)->required();
  ro->add_option("--epoch", epoch_jd, "Julian date (TDB)")->required();
  ro->add_option("--out", out_path, "output PGM path")->required();

  auto* gc = app.add_subcommand("gen-catalog", "write a synthetic star catalog");
  gc->add_option("--out", out_path)->required();
  gc->add_option("--count", gen_count);
  gc->add_option("--seed", gen_seed);
  gc->add_option("--mag-max", gen_mag_max);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (ip->parsed()) {
      const auto cfg = load_with_overrides(config_path, ov);
      const auto result = navsim::run_ip_campaign(cfg);
      navsim::emit_ip_report(cfg, result, out_dir);
    } else if (fc->parsed()) {
      const auto cfg = load_with_overrides(config_path, ov);
      const auto result = navsim::run_filter_campaign(cfg);
      navsim::emit_filter_report(cfg, result, out_dir);
    } else if (ro->parsed()) {
      return run_render_one(config_path, epoch_jd, out_path);
    } else if (gc->parsed()) {
      navsim::save_star_catalog(
          navsim::generate_synthetic_catalog(gen_seed, gen_count, gen_mag_max),
          out_path);
    }
  } catch (const navsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gricp/gricp.h"

namespace fs = std::filesystem;

namespace {

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(gricp_status status) {
  if (status != GRICP_OK) {
    throw CliError(std::string(gricp_status_string(status)) + ": " + gricp_last_error());
  }
}

template <typename T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};

using Cloud = std::unique_ptr<gricp_cloud, Deleter<gricp_cloud, gricp_cloud_destroy>>;
using Traj = std::unique_ptr<gricp_trajectory, Deleter<gricp_trajectory, gricp_trajectory_destroy>>;
using MapperPtr = std::unique_ptr<gricp_mapper, Deleter<gricp_mapper, gricp_mapper_destroy>>;
using Ate = std::unique_ptr<gricp_ate_report, Deleter<gricp_ate_report, gricp_ate_destroy>>;
using ScenarioPtr = std::unique_ptr<gricp_scenario, Deleter<gricp_scenario, gricp_scenario_destroy>>;
using Bench = std::unique_ptr<gricp_bench_report, Deleter<gricp_bench_report, gricp_bench_destroy>>;

Cloud read_cloud(const std::string& path) {
  gricp_cloud* c = nullptr;
  check(gricp_cloud_read(path.c_str(), &c));
  return Cloud(c);
}

Traj read_traj(const std::string& path) {
  gricp_trajectory* t = nullptr;
  check(gricp_trajectory_read(path.c_str(), &t));
  return Traj(t);
}

std::string num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::vector<double> split_numbers(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    const char* first = item.data();
    const char* last = item.data() + item.size();
    while (first < last && *first == ' ') ++first;
    const auto r = std::from_chars(first, last, v);
    if (r.ec != std::errc() || r.ptr != last) throw CliError("not a number: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

gricp_pose parse_prior(const std::string& text) {
  if (text.empty()) return gricp_pose_identity();
  const auto v = split_numbers(text);
  gricp_pose pose{};
  if (v.size() == 4) {
    check(gricp_pose_from_tau(v[0], v[1], v[2], v[3], &pose));
  } else if (v.size() == 7) {
    pose = {v[6], v[3], v[4], v[5], v[0], v[1], v[2]};
    gricp_trajectory* probe = nullptr;
    check(gricp_trajectory_create(&probe));
    Traj guard(probe);
    check(gricp_trajectory_append(probe, 0.0, &pose));
    check(gricp_trajectory_get(probe, 0, nullptr, &pose));
  } else {
    throw CliError("--prior needs 4 values (yaw,tx,ty,tz) or 7 (tx,ty,tz,qx,qy,qz,qw)");
  }
  return pose;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  auto to_u64 = [](const std::string& s) {
    std::uint64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || s.empty()) {
      throw CliError("bad seed '" + s + "'");
    }
    return v;
  };
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      seeds.push_back(to_u64(item));
      continue;
    }
    const auto lo = to_u64(item.substr(0, dash));
    const auto hi = to_u64(item.substr(dash + 1));
    if (hi < lo) throw CliError("bad seed range '" + item + "'");
    for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) throw CliError("no seeds given");
  return seeds;
}

int mode_from(const std::string& s) {
  if (s == "4dof") return GRICP_MODE_4DOF;
  if (s == "6dof") return GRICP_MODE_6DOF;
  throw CliError("--mode must be 4dof or 6dof");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CliError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw CliError("failed writing '" + path.string() + "'");
}

std::string pose_line(double stamp, const gricp_pose& p) {
  return num(stamp) + ' ' + num(p.tx) + ' ' + num(p.ty) + ' ' + num(p.tz) + ' ' + num(p.qx) + ' ' +
         num(p.qy) + ' ' + num(p.qz) + ' ' + num(p.qw);
}

// ---- register ----

struct RegisterArgs {
  std::string scan;
  std::string map;
  std::string prior;
  std::string mode;
  std::string config;
  std::string out;
  std::optional<double> max_distance;
  std::optional<double> trim_ratio;
  std::optional<int> max_iterations;
};

int run_register(const RegisterArgs& a) {
  gricp_mapper_config mc;
  gricp_mapper_config_defaults(&mc);
  if (!a.config.empty()) check(gricp_mapper_config_load(a.config.c_str(), &mc));
  gricp_icp_config cfg = mc.icp;
  if (!a.mode.empty()) cfg.mode = mode_from(a.mode);
  if (a.max_distance) cfg.max_distance = *a.max_distance;
  if (a.trim_ratio) cfg.trim_ratio = *a.trim_ratio;
  if (a.max_iterations) cfg.max_iterations = *a.max_iterations;

  const auto scan = read_cloud(a.scan);
  const auto map = read_cloud(a.map);
  const gricp_pose prior = parse_prior(a.prior);
  gricp_icp_result r{};
  check(gricp_register(scan.get(), map.get(), &prior, &cfg, &r));

  double roll = 0.0, pitch = 0.0, yaw = 0.0;
  check(gricp_pose_euler(&r.pose, &roll, &pitch, &yaw));
  std::ostringstream summary;
  summary << "mode = " << (cfg.mode == GRICP_MODE_4DOF ? "4dof" : "6dof") << '\n'
          << "converged = " << (r.converged ? "true" : "false") << '\n'
          << "iterations = " << r.iterations << '\n'
          << "pairs = " << r.pair_count << '\n'
          << "initial_residual = " << num(r.initial_residual) << '\n'
          << "final_residual = " << num(r.final_residual) << '\n'
          << "pose = " << pose_line(0.0, r.pose).substr(2) << '\n'
          << "rpy = " << num(roll) << ' ' << num(pitch) << ' ' << num(yaw) << '\n';
  std::cout << summary.str();
  if (!a.out.empty()) {
    write_text(a.out, "# stamp tx ty tz qx qy qz qw\n" + pose_line(0.0, r.pose) + '\n');
  }
  return 0;
}

// ---- map / localize ----

struct MapArgs {
  std::string scans;
  std::string priors;
  std::string config;
  std::string out;
  std::string ref_map;
  std::string mode;
  std::optional<double> min_spacing;
  std::optional<double> keep_ratio;
  std::optional<std::uint64_t> seed;
};

std::vector<fs::path> list_scans(const std::string& dir) {
  std::vector<fs::path> files;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(dir, ec)) {
    if (e.is_regular_file() && e.path().extension() == ".ply") files.push_back(e.path());
  }
  if (ec) throw CliError("cannot list '" + dir + "': " + ec.message());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw CliError("no .ply scans in '" + dir + "'");
  return files;
}

int run_map(const MapArgs& a, bool localize) {
  gricp_mapper_config cfg;
  gricp_mapper_config_defaults(&cfg);
  if (!a.config.empty()) check(gricp_mapper_config_load(a.config.c_str(), &cfg));
  if (!a.mode.empty()) cfg.icp.mode = mode_from(a.mode);
  if (a.min_spacing) cfg.insertion_min_spacing = *a.min_spacing;
  if (a.keep_ratio) cfg.scan_keep_ratio = *a.keep_ratio;
  if (a.seed) cfg.seed = *a.seed;
  cfg.localize_only = localize ? 1 : 0;

  const auto files = list_scans(a.scans);
  const auto priors = read_traj(a.priors);
  const size_t n = gricp_trajectory_size(priors.get());
  if (n != files.size()) {
    throw CliError("found " + std::to_string(files.size()) + " scans but " + std::to_string(n) +
                   " priors");
  }
  Cloud ref;
  if (!a.ref_map.empty()) ref = read_cloud(a.ref_map);

  gricp_mapper* raw = nullptr;
  check(gricp_mapper_create(&cfg, ref.get(), &raw));
  MapperPtr mapper(raw);

  std::ostringstream log;
  log << "# index stamp registered failed status iterations converged pairs final_residual "
         "inserted\n";
  size_t failures = 0;
  for (size_t i = 0; i < n; ++i) {
    double stamp = 0.0;
    gricp_pose prior{};
    check(gricp_trajectory_get(priors.get(), i, &stamp, &prior));
    const auto scan = read_cloud(files[i].string());
    gricp_scan_outcome o{};
    check(gricp_mapper_process(mapper.get(), scan.get(), &prior, stamp, &o));
    if (o.failed) {
      ++failures;
      std::cerr << "warning: scan " << i << " (" << files[i].filename().string()
                << "): " << gricp_status_string(o.failure) << "; using prior\n";
    }
    log << i << ' ' << num(stamp) << ' ' << o.registered << ' ' << o.failed << ' '
        << (o.failed ? gricp_status_string(o.failure) : "ok") << ' ' << o.icp.iterations << ' '
        << o.icp.converged << ' ' << o.icp.pair_count << ' ' << num(o.icp.final_residual) << ' '
        << o.inserted << '\n';
  }

  const fs::path out(a.out);
  fs::create_directories(out);
  gricp_trajectory* traj = nullptr;
  check(gricp_mapper_trajectory(mapper.get(), &traj));
  Traj trajectory(traj);
  check(gricp_trajectory_write(trajectory.get(), (out / "trajectory.txt").string().c_str()));
  write_text(out / "scans.txt", log.str());
  gricp_cloud* map_raw = nullptr;
  check(gricp_mapper_map(mapper.get(), &map_raw));
  Cloud map(map_raw);
  if (!localize) check(gricp_cloud_write(map.get(), (out / "map.ply").string().c_str()));

  std::cout << "scans = " << n << '\n'
            << "failures = " << failures << '\n'
            << "map_points = " << gricp_cloud_size(map.get()) << '\n';
  return 0;
}

// ---- eval-ate ----

struct EvalArgs {
  std::string est;
  std::string ref;
  bool align = false;
  double max_dt = 0.01;
  std::string out;
};

int run_eval(const EvalArgs& a) {
  const auto est = read_traj(a.est);
  const auto ref = read_traj(a.ref);
  gricp_ate_report* raw = nullptr;
  check(gricp_eval_ate(est.get(), ref.get(), a.max_dt, a.align ? 1 : 0, &raw));
  Ate report(raw);
  double q[3];
  check(gricp_ate_quartiles(report.get(), q));
  std::cout << "poses = " << gricp_ate_size(report.get()) << '\n'
            << "ate_rmse = " << num(gricp_ate_rmse(report.get())) << '\n'
            << "final_abs_ez = " << num(gricp_ate_final_abs_z(report.get())) << '\n'
            << "normalized_quartiles_percent = " << num(q[0]) << ' ' << num(q[1]) << ' '
            << num(q[2]) << '\n';
  if (!a.out.empty()) {
    const fs::path out(a.out);
    fs::create_directories(out);
    check(gricp_ate_write_series(report.get(), (out / "ate_series.txt").string().c_str()));
    check(gricp_ate_write_summary(report.get(), (out / "ate_summary.txt").string().c_str()));
  }
  return 0;
}

// ---- synth / bench-drift ----

struct ScenarioArgs {
  std::string scenario;
  std::vector<std::string> overrides;
  std::string seeds;
  std::string out;
  bool scene_map = false;
};

ScenarioPtr load_scenario(const ScenarioArgs& a) {
  gricp_scenario* raw = nullptr;
  if (a.scenario.empty()) {
    check(gricp_scenario_create(&raw));
  } else {
    check(gricp_scenario_load(a.scenario.c_str(), &raw));
  }
  ScenarioPtr s(raw);
  for (const auto& kv : a.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw CliError("--set expects key=value, got '" + kv + "'");
    auto trim = [](std::string t) {
      const auto b = t.find_first_not_of(" \t");
      const auto e = t.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : t.substr(b, e - b + 1);
    };
    check(gricp_scenario_set(s.get(), trim(kv.substr(0, eq)).c_str(),
                             trim(kv.substr(eq + 1)).c_str()));
  }
  return s;
}

int run_synth(const ScenarioArgs& a) {
  const auto scenario = load_scenario(a);
  const auto seeds = parse_seeds(a.seeds);
  for (const auto seed : seeds) {
    const fs::path dir = fs::path(a.out) / ("seed_" + std::to_string(seed));
    check(gricp_synth_generate(scenario.get(), seed, a.scene_map ? 1 : 0, dir.string().c_str()));
    std::cout << "seed " << seed << " -> seed_" << seed << '\n';
  }
  return 0;
}

int run_bench(const ScenarioArgs& a) {
  const auto scenario = load_scenario(a);
  const auto seeds = parse_seeds(a.seeds);
  gricp_bench_report* raw = nullptr;
  check(gricp_bench_drift(scenario.get(), seeds.data(), seeds.size(),
                          a.out.empty() ? nullptr : a.out.c_str(), &raw));
  Bench report(raw);
  std::cout << "# seed final_abs_ez_4dof final_abs_ez_6dof\n";
  for (size_t i = 0; i < gricp_bench_size(report.get()); ++i) {
    std::uint64_t seed = 0;
    double e4 = 0.0, e6 = 0.0;
    check(gricp_bench_seed(report.get(), i, &seed, &e4, &e6));
    std::cout << seed << ' ' << num(e4) << ' ' << num(e6) << '\n';
  }
  const double m4 = gricp_bench_median_4dof(report.get());
  const double m6 = gricp_bench_median_6dof(report.get());
  std::cout << "median_final_abs_ez_4dof = " << num(m4) << '\n'
            << "median_final_abs_ez_6dof = " << num(m6) << '\n'
            << "wins_4dof = " << gricp_bench_wins_4dof(report.get()) << '/'
            << gricp_bench_size(report.get()) << '\n';
  return 0;
}

const char* kCloudFormat =
    "Clouds: ASCII PLY, one 'vertex' element with double x y z and optional nx ny nz.";
const char* kTrajFormat =
    "Trajectories: one pose per line, 'stamp tx ty tz qx qy qz qw'; '#' starts a comment.";
const char* kConfigFormat =
    "Config files: 'key = value' per line, '#' comments. Mapper keys: icp.mode (4dof|6dof), "
    "icp.max_iterations, icp.trans_epsilon, icp.rot_epsilon, match.max_distance, "
    "match.trim_ratio, mapper.min_spacing, mapper.scan_keep_ratio, mapper.normal_k, "
    "mapper.seed. Flags override file values.";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gravity-constrained 4-DOF and classical 6-DOF point-to-plane ICP"};
  app.require_subcommand(1);

  RegisterArgs reg;
  auto* c_reg = app.add_subcommand("register", "Register one scan onto a map");
  c_reg->add_option("--scan", reg.scan, "Scan cloud in the sensor frame (PLY)")->required();
  c_reg->add_option("--map", reg.map, "Map cloud in the world frame (PLY); normals are "
                                      "estimated when absent")->required();
  c_reg->add_option("--prior", reg.prior,
                    "Initial pose: 'yaw,tx,ty,tz' or 'tx,ty,tz,qx,qy,qz,qw' (default identity)");
  c_reg->add_option("--mode", reg.mode, "4dof (yaw + translation, default) or 6dof")
      ->check(CLI::IsMember({"4dof", "6dof"}));
  c_reg->add_option("--config", reg.config, "Key = value file with icp.* and match.* keys")
      ->check(CLI::ExistingFile);
  c_reg->add_option("--max-distance", reg.max_distance, "Correspondence distance gate (m)");
  c_reg->add_option("--trim-ratio", reg.trim_ratio, "Fraction of closest pairs kept");
  c_reg->add_option("--max-iterations", reg.max_iterations, "Iteration cap");
  c_reg->add_option("--out", reg.out, "Write the estimated pose as a one-line trajectory file");
  c_reg->footer(std::string(kCloudFormat) + "\n" + kTrajFormat + "\n" + kConfigFormat);

  MapArgs map_args;
  auto add_map_options = [&](CLI::App* cmd) {
    cmd->add_option("--scans", map_args.scans, "Directory of scan PLY files, processed in "
                                               "file-name order")->required()->check(CLI::ExistingDirectory);
    cmd->add_option("--priors", map_args.priors, "Trajectory file with one prior per scan")
        ->required();
    cmd->add_option("--config", map_args.config, "Key = value mapper config")
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", map_args.out, "Output directory")->required();
    cmd->add_option("--mode", map_args.mode, "4dof or 6dof")->check(CLI::IsMember({"4dof", "6dof"}));
    cmd->add_option("--min-spacing", map_args.min_spacing, "Insertion min spacing (m)");
    cmd->add_option("--keep-ratio", map_args.keep_ratio, "Scan subsampling ratio in (0, 1]");
    cmd->add_option("--seed", map_args.seed, "Subsampling seed");
    cmd->footer(std::string("Writes trajectory.txt and scans.txt (per-scan log)") +
                (cmd->get_name() == "map" ? " and map.ply" : "") + " under --out.\n" +
                kCloudFormat + "\n" + kTrajFormat + "\n" + kConfigFormat);
  };
  auto* c_map = app.add_subcommand("map", "Build a map incrementally from a scan sequence");
  add_map_options(c_map);
  auto* c_loc = app.add_subcommand("localize", "Localize a scan sequence in a frozen map");
  add_map_options(c_loc);
  c_loc->add_option("--ref-map", map_args.ref_map, "Reference map (PLY)")->required();

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval-ate", "Absolute trajectory error of an estimate");
  c_eval->add_option("--est", ev.est, "Estimated trajectory")->required();
  c_eval->add_option("--ref", ev.ref, "Reference trajectory")->required();
  c_eval->add_flag("--align", ev.align, "Rigidly align the estimate onto the reference first");
  c_eval->add_option("--max-dt", ev.max_dt, "Stamp association tolerance (s)")->capture_default_str();
  c_eval->add_option("--out", ev.out, "Directory for ate_series.txt and ate_summary.txt");
  c_eval->footer(std::string(kTrajFormat) +
                 "\nate_series.txt rows: 'distance e_z e_norm' (distance along the reference "
                 "path). Normalized ATE uses poses at least 1 m along the path.");

  ScenarioArgs synth_args;
  ScenarioArgs bench_args;
  auto add_scenario_options = [](CLI::App* cmd, ScenarioArgs& sc, const char* default_seeds) {
    sc.seeds = default_seeds;
    cmd->add_option("--scenario", sc.scenario, "Scenario file (defaults built in)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seeds", sc.seeds, "Seeds: list and/or ranges, e.g. '1,2,3' or '0-9'")
        ->capture_default_str();
    cmd->add_option("--set", sc.overrides, "Override a scenario key: --set key=value");
    cmd->add_option("--out", sc.out, "Output directory")->required();
    cmd->footer(
        "Scenario keys: scene.kind (tunnel|corridor|terrain), scene.length, scene.width, "
        "scene.height, scene.radius, scene.axis_height, scene.feature_spacing, "
        "scene.feature_size, scene.terrain_amplitude, scene.terrain_wavelength, scene.density, "
        "path.start_x, path.step, path.height, path.lateral_amplitude, path.lateral_period, "
        "path.attitude_jitter, path.scan_period, sensor.max_range, sensor.range_noise_sigma, "
        "sensor.points_per_scan, sensor.min_elevation_deg, sensor.max_elevation_deg, "
        "prior.odom_translation_noise_sigma, prior.yaw_drift_per_scan, "
        "prior.rollpitch_noise_sigma, n_scans, plus the mapper keys.\n" +
        std::string(kConfigFormat));
  };
  auto* c_synth = app.add_subcommand("synth", "Generate synthetic scan sequences");
  add_scenario_options(c_synth, synth_args, "0");
  c_synth->add_flag("--scene-map", synth_args.scene_map, "Also write scene_map.ply per seed");
  auto* c_bench = app.add_subcommand("bench-drift", "Compare 4-DOF and 6-DOF mapping drift");
  add_scenario_options(c_bench, bench_args, "0-9");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*c_reg) return run_register(reg);
    if (*c_map) return run_map(map_args, false);
    if (*c_loc) return run_map(map_args, true);
    if (*c_eval) return run_eval(ev);
    if (*c_synth) return run_synth(synth_args);
    if (*c_bench) return run_bench(bench_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

#include "gricp/gricp.h"

#include <exception>
#include <fstream>
#include <memory>
#include <new>
#include <string>

#include "gricp/eval.hpp"
#include "gricp/icp.hpp"
#include "gricp/io.hpp"
#include "gricp/mapper.hpp"
#include "gricp/preprocessing.hpp"
#include "gricp/synth.hpp"

struct gricp_cloud {
  gricp::PointCloud cloud;
};

struct gricp_trajectory {
  gricp::Trajectory traj;
};

struct gricp_mapper {
  std::unique_ptr<gricp::Mapper> mapper;
};

struct gricp_ate_report {
  gricp::AteReport report;
};

struct gricp_scenario {
  gricp::KeyValueConfig cfg;
  gricp::Scenario scenario;
};

struct gricp_bench_report {
  gricp::DriftReport report;
};

namespace {

thread_local std::string g_last_error;

gricp_status to_status(gricp::ErrorCode code) {
  return static_cast<gricp_status>(static_cast<int>(code));
}

gricp_status fail(gricp_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename F>
gricp_status guarded(F&& body) {
  try {
    body();
    return GRICP_OK;
  } catch (const gricp::Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(GRICP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(GRICP_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(GRICP_ERR_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw gricp::Error(gricp::ErrorCode::kInvalidArgument, what);
}

gricp_pose to_c(const gricp::RigidTransform& t) {
  const auto& q = t.rotation();
  const auto& p = t.translation();
  return {q.w(), q.x(), q.y(), q.z(), p.x(), p.y(), p.z()};
}

gricp::RigidTransform from_c(const gricp_pose& p) {
  return {Eigen::Quaterniond(p.qw, p.qx, p.qy, p.qz), gricp::Vec3(p.tx, p.ty, p.tz)};
}

gricp::IcpConfig from_c(const gricp_icp_config& c) {
  gricp::IcpConfig out;
  require(c.mode == GRICP_MODE_4DOF || c.mode == GRICP_MODE_6DOF, "unknown ICP mode");
  out.mode = c.mode == GRICP_MODE_4DOF ? gricp::IcpMode::kFourDof : gricp::IcpMode::kSixDof;
  out.max_iterations = c.max_iterations;
  out.trans_epsilon = c.trans_epsilon;
  out.rot_epsilon = c.rot_epsilon;
  out.match_params.max_distance = c.max_distance;
  out.match_params.trim_ratio = c.trim_ratio;
  out.validate();
  return out;
}

gricp_icp_config to_c(const gricp::IcpConfig& c) {
  return {c.mode == gricp::IcpMode::kFourDof ? GRICP_MODE_4DOF : GRICP_MODE_6DOF,
          c.max_iterations,
          c.trans_epsilon,
          c.rot_epsilon,
          c.match_params.max_distance,
          c.match_params.trim_ratio};
}

gricp::MapperConfig from_c(const gricp_mapper_config& c) {
  gricp::MapperConfig out;
  out.icp = from_c(c.icp);
  out.insertion_min_spacing = c.insertion_min_spacing;
  out.scan_keep_ratio = c.scan_keep_ratio;
  out.normal_k = c.normal_k;
  out.localize_only = c.localize_only != 0;
  out.seed = c.seed;
  out.validate();
  return out;
}

gricp_mapper_config to_c(const gricp::MapperConfig& c) {
  return {to_c(c.icp), c.insertion_min_spacing, c.scan_keep_ratio, c.normal_k,
          c.localize_only ? 1 : 0, c.seed};
}

gricp_icp_result to_c(const gricp::IcpResult& r) {
  return {to_c(r.transform), r.iterations,       r.converged ? 1 : 0,
          r.initial_residual, r.final_residual, r.pair_count};
}

gricp::PointCloud with_normals(const gricp::PointCloud& cloud, std::size_t k) {
  if (cloud.has_normals()) return cloud;
  gricp::NormalEstimationParams params;
  params.k_neighbors = k;
  return gricp::estimate_normals(cloud, params);
}

}  // namespace

extern "C" {

const char* gricp_last_error(void) { return g_last_error.c_str(); }

const char* gricp_status_string(gricp_status status) {
  switch (status) {
    case GRICP_OK: return "ok";
    case GRICP_ERR_INVALID_ARGUMENT: return "invalid argument";
    case GRICP_ERR_PARSE: return "parse error";
    case GRICP_ERR_IO: return "i/o error";
    case GRICP_ERR_EMPTY_REFERENCE: return "empty reference cloud";
    case GRICP_ERR_NO_CORRESPONDENCES: return "no correspondences";
    case GRICP_ERR_DEGENERATE_GEOMETRY: return "degenerate geometry";
    case GRICP_ERR_INSUFFICIENT_POINTS: return "insufficient points for normal estimation";
    case GRICP_ERR_EMPTY_TRAJECTORY: return "empty trajectory";
    case GRICP_ERR_NO_ASSOCIATION: return "no associated poses";
    case GRICP_ERR_OUT_OF_SCENE: return "path leaves the scene";
    case GRICP_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

gricp_pose gricp_pose_identity(void) { return {1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0}; }

gricp_status gricp_pose_from_tau(double gamma, double tx, double ty, double tz, gricp_pose* out) {
  return guarded([&] {
    require(out != nullptr, "null output");
    *out = to_c(gricp::tau_to_transform(gricp::Tau4(gamma, gricp::Vec3(tx, ty, tz))));
  });
}

gricp_status gricp_pose_euler(const gricp_pose* pose, double* roll, double* pitch, double* yaw) {
  return guarded([&] {
    require(pose != nullptr, "null pose");
    const auto t = from_c(*pose);
    if (roll) *roll = t.roll();
    if (pitch) *pitch = t.pitch();
    if (yaw) *yaw = t.yaw();
  });
}

gricp_status gricp_cloud_create(const double* xyz, size_t n, const double* normals,
                                gricp_cloud** out) {
  return guarded([&] {
    require(out != nullptr, "null output");
    require(xyz != nullptr || n == 0, "null point buffer");
    std::vector<gricp::Vec3> pts(n);
    for (size_t i = 0; i < n; ++i) pts[i] = gricp::Vec3(xyz[3 * i], xyz[3 * i + 1], xyz[3 * i + 2]);
    if (normals) {
      std::vector<gricp::Vec3> ns(n);
      for (size_t i = 0; i < n; ++i) {
        ns[i] = gricp::Vec3(normals[3 * i], normals[3 * i + 1], normals[3 * i + 2]);
      }
      *out = new gricp_cloud{gricp::PointCloud(std::move(pts), std::move(ns), "world")};
    } else {
      *out = new gricp_cloud{gricp::PointCloud(std::move(pts), "world")};
    }
  });
}

gricp_status gricp_cloud_read(const char* path, gricp_cloud** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new gricp_cloud{gricp::read_cloud(std::filesystem::path(path))};
  });
}

gricp_status gricp_cloud_write(const gricp_cloud* cloud, const char* path) {
  return guarded([&] {
    require(cloud != nullptr && path != nullptr, "null argument");
    gricp::write_cloud(cloud->cloud, std::filesystem::path(path));
  });
}

void gricp_cloud_destroy(gricp_cloud* cloud) { delete cloud; }

size_t gricp_cloud_size(const gricp_cloud* cloud) { return cloud ? cloud->cloud.size() : 0; }

int gricp_cloud_has_normals(const gricp_cloud* cloud) {
  return cloud && cloud->cloud.has_normals() ? 1 : 0;
}

gricp_status gricp_cloud_point(const gricp_cloud* cloud, size_t i, double xyz[3]) {
  return guarded([&] {
    require(cloud != nullptr && xyz != nullptr, "null argument");
    require(i < cloud->cloud.size(), "point index out of range");
    const auto& p = cloud->cloud.point(i);
    xyz[0] = p.x();
    xyz[1] = p.y();
    xyz[2] = p.z();
  });
}

gricp_status gricp_cloud_normal(const gricp_cloud* cloud, size_t i, double n[3]) {
  return guarded([&] {
    require(cloud != nullptr && n != nullptr, "null argument");
    require(cloud->cloud.has_normals(), "cloud has no normals");
    require(i < cloud->cloud.size(), "point index out of range");
    const auto& v = cloud->cloud.normal(i);
    n[0] = v.x();
    n[1] = v.y();
    n[2] = v.z();
  });
}

gricp_status gricp_cloud_estimate_normals(const gricp_cloud* cloud, size_t k,
                                          const double orient[3], gricp_cloud** out) {
  return guarded([&] {
    require(cloud != nullptr && out != nullptr, "null argument");
    gricp::NormalEstimationParams params;
    params.k_neighbors = k;
    if (orient) params.orient_toward = gricp::Vec3(orient[0], orient[1], orient[2]);
    *out = new gricp_cloud{gricp::estimate_normals(cloud->cloud, params)};
  });
}

gricp_status gricp_trajectory_create(gricp_trajectory** out) {
  return guarded([&] {
    require(out != nullptr, "null output");
    *out = new gricp_trajectory{};
  });
}

gricp_status gricp_trajectory_read(const char* path, gricp_trajectory** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new gricp_trajectory{gricp::read_trajectory(std::filesystem::path(path))};
  });
}

gricp_status gricp_trajectory_write(const gricp_trajectory* traj, const char* path) {
  return guarded([&] {
    require(traj != nullptr && path != nullptr, "null argument");
    gricp::write_trajectory(traj->traj, std::filesystem::path(path));
  });
}

void gricp_trajectory_destroy(gricp_trajectory* traj) { delete traj; }

gricp_status gricp_trajectory_append(gricp_trajectory* traj, double stamp, const gricp_pose* pose) {
  return guarded([&] {
    require(traj != nullptr && pose != nullptr, "null argument");
    traj->traj.append(stamp, from_c(*pose));
  });
}

size_t gricp_trajectory_size(const gricp_trajectory* traj) { return traj ? traj->traj.size() : 0; }

gricp_status gricp_trajectory_get(const gricp_trajectory* traj, size_t i, double* stamp,
                                  gricp_pose* pose) {
  return guarded([&] {
    require(traj != nullptr, "null trajectory");
    require(i < traj->traj.size(), "pose index out of range");
    if (stamp) *stamp = traj->traj[i].stamp;
    if (pose) *pose = to_c(traj->traj[i].pose);
  });
}

void gricp_icp_config_defaults(gricp_icp_config* config) {
  if (config) *config = to_c(gricp::IcpConfig{});
}

gricp_status gricp_register(const gricp_cloud* scan, const gricp_cloud* map,
                            const gricp_pose* prior, const gricp_icp_config* config,
                            gricp_icp_result* out) {
  return guarded([&] {
    require(scan != nullptr && map != nullptr && prior != nullptr && config != nullptr &&
                out != nullptr,
            "null argument");
    const auto icp = from_c(*config);
    const auto ref = with_normals(map->cloud, 10);
    *out = to_c(gricp::register_scan(scan->cloud, ref, from_c(*prior), icp));
  });
}

void gricp_mapper_config_defaults(gricp_mapper_config* config) {
  if (config) *config = to_c(gricp::MapperConfig{});
}

gricp_status gricp_mapper_config_load(const char* path, gricp_mapper_config* config) {
  return guarded([&] {
    require(path != nullptr && config != nullptr, "null argument");
    const auto cfg = gricp::KeyValueConfig::load(std::filesystem::path(path));
    cfg.reject_unknown(gricp::mapper_config_keys());
    *config = to_c(gricp::mapper_config_from(cfg, from_c(*config)));
  });
}

gricp_status gricp_mapper_create(const gricp_mapper_config* config, const gricp_cloud* reference,
                                 gricp_mapper** out) {
  return guarded([&] {
    require(config != nullptr && out != nullptr, "null argument");
    auto cfg = from_c(*config);
    auto handle = std::make_unique<gricp_mapper>();
    if (reference) {
      handle->mapper = std::make_unique<gricp::Mapper>(cfg, reference->cloud);
    } else {
      handle->mapper = std::make_unique<gricp::Mapper>(cfg);
    }
    *out = handle.release();
  });
}

void gricp_mapper_destroy(gricp_mapper* mapper) { delete mapper; }

gricp_status gricp_mapper_process(gricp_mapper* mapper, const gricp_cloud* scan,
                                  const gricp_pose* prior, double stamp,
                                  gricp_scan_outcome* outcome) {
  return guarded([&] {
    require(mapper != nullptr && scan != nullptr && prior != nullptr, "null argument");
    const auto r = mapper->mapper->process_scan(scan->cloud, from_c(*prior), stamp);
    if (!outcome) return;
    outcome->icp = to_c(r.icp);
    outcome->registered = r.registered ? 1 : 0;
    outcome->failed = r.failed ? 1 : 0;
    outcome->failure = GRICP_OK;
    if (r.failed) outcome->failure = to_status(mapper->mapper->state().failures.back().code);
    outcome->inserted = r.inserted;
  });
}

gricp_status gricp_mapper_map(const gricp_mapper* mapper, gricp_cloud** out) {
  return guarded([&] {
    require(mapper != nullptr && out != nullptr, "null argument");
    *out = new gricp_cloud{mapper->mapper->state().cloud};
  });
}

gricp_status gricp_mapper_trajectory(const gricp_mapper* mapper, gricp_trajectory** out) {
  return guarded([&] {
    require(mapper != nullptr && out != nullptr, "null argument");
    *out = new gricp_trajectory{mapper->mapper->state().pose_log};
  });
}

gricp_status gricp_eval_ate(const gricp_trajectory* est, const gricp_trajectory* ref,
                            double max_dt, int align, gricp_ate_report** out) {
  return guarded([&] {
    require(est != nullptr && ref != nullptr && out != nullptr, "null argument");
    const auto pairs = gricp::associate(est->traj, ref->traj, max_dt);
    *out = new gricp_ate_report{gricp::compute_ate(pairs, align != 0)};
  });
}

void gricp_ate_destroy(gricp_ate_report* report) { delete report; }

size_t gricp_ate_size(const gricp_ate_report* report) {
  return report ? report->report.per_pose.size() : 0;
}

gricp_status gricp_ate_pose(const gricp_ate_report* report, size_t i, double* stamp,
                            double e_xyz[3], double* e_norm, double* distance) {
  return guarded([&] {
    require(report != nullptr, "null report");
    require(i < report->report.per_pose.size(), "pose index out of range");
    const auto& e = report->report.per_pose[i];
    if (stamp) *stamp = e.stamp;
    if (e_xyz) {
      e_xyz[0] = e.e_xyz.x();
      e_xyz[1] = e.e_xyz.y();
      e_xyz[2] = e.e_xyz.z();
    }
    if (e_norm) *e_norm = e.e_norm;
    if (distance) *distance = e.distance;
  });
}

gricp_status gricp_ate_quartiles(const gricp_ate_report* report, double out[3]) {
  return guarded([&] {
    require(report != nullptr && out != nullptr, "null argument");
    for (int i = 0; i < 3; ++i) out[i] = report->report.quartiles_normalized[i];
  });
}

double gricp_ate_rmse(const gricp_ate_report* report) {
  return report ? report->report.rmse() : 0.0;
}

double gricp_ate_final_abs_z(const gricp_ate_report* report) {
  return report ? report->report.final_abs_z() : 0.0;
}

gricp_status gricp_ate_write_series(const gricp_ate_report* report, const char* path) {
  return guarded([&] {
    require(report != nullptr && path != nullptr, "null argument");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw gricp::Error(gricp::ErrorCode::kIo, std::string("cannot open '") + path + "'");
    gricp::write_ate_series(out, report->report);
    if (!out) throw gricp::Error(gricp::ErrorCode::kIo, std::string("failed writing '") + path + "'");
  });
}

gricp_status gricp_ate_write_summary(const gricp_ate_report* report, const char* path) {
  return guarded([&] {
    require(report != nullptr && path != nullptr, "null argument");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw gricp::Error(gricp::ErrorCode::kIo, std::string("cannot open '") + path + "'");
    gricp::write_ate_summary(out, report->report);
    if (!out) throw gricp::Error(gricp::ErrorCode::kIo, std::string("failed writing '") + path + "'");
  });
}

gricp_status gricp_pitch_correction(double loop_length, double elevation_error, double* out) {
  return guarded([&] {
    require(out != nullptr, "null output");
    *out = gricp::pitch_correction(loop_length, elevation_error);
  });
}

gricp_status gricp_scenario_create(gricp_scenario** out) {
  return guarded([&] {
    require(out != nullptr, "null output");
    *out = new gricp_scenario{};
  });
}

gricp_status gricp_scenario_load(const char* path, gricp_scenario** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    auto cfg = gricp::KeyValueConfig::load(std::filesystem::path(path));
    auto scenario = gricp::Scenario::from_config(cfg);
    *out = new gricp_scenario{std::move(cfg), std::move(scenario)};
  });
}

void gricp_scenario_destroy(gricp_scenario* scenario) { delete scenario; }

gricp_status gricp_scenario_set(gricp_scenario* scenario, const char* key, const char* value) {
  return guarded([&] {
    require(scenario != nullptr && key != nullptr && value != nullptr, "null argument");
    auto cfg = scenario->cfg;
    cfg.set(key, value);
    auto updated = gricp::Scenario::from_config(cfg);
    scenario->cfg = std::move(cfg);
    scenario->scenario = std::move(updated);
  });
}

gricp_status gricp_synth_generate(const gricp_scenario* scenario, uint64_t seed, int write_scene,
                                  const char* out_dir) {
  return guarded([&] {
    require(scenario != nullptr && out_dir != nullptr, "null argument");
    const auto& s = scenario->scenario;
    gricp::Scene scene = s.scene;
    scene.seed = seed;
    const auto frames = gricp::generate_sequence(scene, s.path, s.sensor, s.prior, s.n_scans, seed);
    const std::filesystem::path dir(out_dir);
    gricp::write_sequence(frames, dir);
    if (write_scene) {
      gricp::write_cloud(gricp::SceneModel(scene).sample_surface(), dir / "scene_map.ply");
    }
  });
}

gricp_status gricp_bench_drift(const gricp_scenario* scenario, const uint64_t* seeds,
                               size_t n_seeds, const char* out_dir, gricp_bench_report** out) {
  return guarded([&] {
    require(scenario != nullptr && out != nullptr, "null argument");
    require(seeds != nullptr || n_seeds == 0, "null seed list");
    std::vector<std::uint64_t> list(seeds, seeds + n_seeds);
    auto report = std::make_unique<gricp_bench_report>();
    report->report = gricp::run_drift_benchmark(scenario->scenario, list);
    if (out_dir) gricp::write_drift_report(report->report, std::filesystem::path(out_dir));
    *out = report.release();
  });
}

void gricp_bench_destroy(gricp_bench_report* report) { delete report; }

size_t gricp_bench_size(const gricp_bench_report* report) {
  return report ? report->report.runs.size() : 0;
}

gricp_status gricp_bench_seed(const gricp_bench_report* report, size_t i, uint64_t* seed,
                              double* final_abs_ez_4dof, double* final_abs_ez_6dof) {
  return guarded([&] {
    require(report != nullptr, "null report");
    require(i < report->report.runs.size(), "seed index out of range");
    const auto& run = report->report.runs[i];
    if (seed) *seed = run.seed;
    if (final_abs_ez_4dof) *final_abs_ez_4dof = run.four_dof.ate.final_abs_z();
    if (final_abs_ez_6dof) *final_abs_ez_6dof = run.six_dof.ate.final_abs_z();
  });
}

double gricp_bench_median_4dof(const gricp_bench_report* report) {
  return report ? report->report.median_final_abs_ez_4dof : 0.0;
}

double gricp_bench_median_6dof(const gricp_bench_report* report) {
  return report ? report->report.median_final_abs_ez_6dof : 0.0;
}

size_t gricp_bench_wins_4dof(const gricp_bench_report* report) {
  return report ? report->report.wins_4dof : 0;
}

}  // extern "C"

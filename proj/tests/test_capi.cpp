#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "gricp/gricp.h"

namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path path;
  explicit Scratch(const std::string& tag) {
    path = fs::temp_directory_path() / ("gricp_capi_" + tag + "_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string operator/(const std::string& s) const { return (path / s).string(); }
};

// Three orthogonal unit planes through the origin, exact normals.
void planes(std::size_t per_plane, std::vector<double>& xyz, std::vector<double>& normals) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int axis = 0; axis < 3; ++axis) {
    for (std::size_t i = 0; i < per_plane; ++i) {
      double p[3] = {u(rng), u(rng), u(rng)};
      p[axis] = 0.0;
      for (int k = 0; k < 3; ++k) {
        xyz.push_back(p[k]);
        normals.push_back(k == axis ? 1.0 : 0.0);
      }
    }
  }
}

// Applies q * p + t.
void move(const gricp_pose& pose, const double* in, double* out) {
  const double w = pose.qw, x = pose.qx, y = pose.qy, z = pose.qz;
  const double r[9] = {1 - 2 * (y * y + z * z), 2 * (x * y - w * z),     2 * (x * z + w * y),
                       2 * (x * y + w * z),     1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
                       2 * (x * z - w * y),     2 * (y * z + w * x),     1 - 2 * (x * x + y * y)};
  out[0] = r[0] * in[0] + r[1] * in[1] + r[2] * in[2] + pose.tx;
  out[1] = r[3] * in[0] + r[4] * in[1] + r[5] * in[2] + pose.ty;
  out[2] = r[6] * in[0] + r[7] * in[1] + r[8] * in[2] + pose.tz;
}

}  // namespace

TEST_CASE("status strings and last error") {
  CHECK(std::string(gricp_status_string(GRICP_OK)) == "ok");
  CHECK(std::string(gricp_status_string(GRICP_ERR_DEGENERATE_GEOMETRY)) == "degenerate geometry");
  gricp_cloud* c = nullptr;
  CHECK(gricp_cloud_read("/nonexistent/x.ply", &c) == GRICP_ERR_IO);
  CHECK(c == nullptr);
  CHECK(std::string(gricp_last_error()).find("x.ply") != std::string::npos);
  CHECK(gricp_cloud_create(nullptr, 3, nullptr, &c) == GRICP_ERR_INVALID_ARGUMENT);
  CHECK(gricp_cloud_create(nullptr, 0, nullptr, nullptr) == GRICP_ERR_INVALID_ARGUMENT);
}

TEST_CASE("poses") {
  const gricp_pose id = gricp_pose_identity();
  CHECK(id.qw == 1.0);
  gricp_pose p;
  REQUIRE(gricp_pose_from_tau(0.3, 1, 2, 3, &p) == GRICP_OK);
  double roll = 1, pitch = 1, yaw = 0;
  REQUIRE(gricp_pose_euler(&p, &roll, &pitch, &yaw) == GRICP_OK);
  CHECK(roll == 0.0);
  CHECK(pitch == 0.0);
  CHECK(yaw == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(p.tz == 3.0);
}

TEST_CASE("clouds through the C API") {
  std::vector<double> xyz, normals;
  planes(50, xyz, normals);
  gricp_cloud* cloud = nullptr;
  REQUIRE(gricp_cloud_create(xyz.data(), xyz.size() / 3, normals.data(), &cloud) == GRICP_OK);
  CHECK(gricp_cloud_size(cloud) == 150);
  CHECK(gricp_cloud_has_normals(cloud) == 1);
  double p[3];
  REQUIRE(gricp_cloud_point(cloud, 4, p) == GRICP_OK);
  CHECK(p[0] == xyz[12]);
  CHECK(gricp_cloud_point(cloud, 150, p) == GRICP_ERR_INVALID_ARGUMENT);

  Scratch dir("cloud");
  REQUIRE(gricp_cloud_write(cloud, (dir / "c.ply").c_str()) == GRICP_OK);
  gricp_cloud* back = nullptr;
  REQUIRE(gricp_cloud_read((dir / "c.ply").c_str(), &back) == GRICP_OK);
  CHECK(gricp_cloud_size(back) == 150);
  double q[3];
  gricp_cloud_point(back, 149, q);
  CHECK(q[2] == xyz[149 * 3 + 2]);

  gricp_cloud* bare = nullptr;
  REQUIRE(gricp_cloud_create(xyz.data(), xyz.size() / 3, nullptr, &bare) == GRICP_OK);
  CHECK(gricp_cloud_has_normals(bare) == 0);
  double n[3];
  CHECK(gricp_cloud_normal(bare, 0, n) == GRICP_ERR_INVALID_ARGUMENT);
  gricp_cloud* with_n = nullptr;
  const double above[3] = {1, 1, 1};
  REQUIRE(gricp_cloud_estimate_normals(bare, 8, above, &with_n) == GRICP_OK);
  REQUIRE(gricp_cloud_normal(with_n, 120, n) == GRICP_OK);
  CHECK(std::abs(n[2] - 1.0) < 1e-6);

  gricp_cloud_destroy(with_n);
  gricp_cloud_destroy(bare);
  gricp_cloud_destroy(back);
  gricp_cloud_destroy(cloud);
  gricp_cloud_destroy(nullptr);
}

TEST_CASE("trajectories through the C API") {
  gricp_trajectory* t = nullptr;
  REQUIRE(gricp_trajectory_create(&t) == GRICP_OK);
  gricp_pose p;
  for (int i = 0; i < 5; ++i) {
    gricp_pose_from_tau(0.1 * i, i, 0, 0, &p);
    REQUIRE(gricp_trajectory_append(t, i, &p) == GRICP_OK);
  }
  CHECK(gricp_trajectory_append(t, 2.0, &p) == GRICP_ERR_INVALID_ARGUMENT);
  CHECK(gricp_trajectory_size(t) == 5);
  Scratch dir("traj");
  REQUIRE(gricp_trajectory_write(t, (dir / "t.txt").c_str()) == GRICP_OK);
  gricp_trajectory* back = nullptr;
  REQUIRE(gricp_trajectory_read((dir / "t.txt").c_str(), &back) == GRICP_OK);
  double stamp = 0;
  gricp_pose q;
  REQUIRE(gricp_trajectory_get(back, 3, &stamp, &q) == GRICP_OK);
  CHECK(stamp == 3.0);
  CHECK(q.tx == 3.0);

  std::ofstream(dir / "empty.txt") << "# nothing\n";
  gricp_trajectory* none = nullptr;
  CHECK(gricp_trajectory_read((dir / "empty.txt").c_str(), &none) == GRICP_ERR_EMPTY_TRAJECTORY);
  CHECK(std::string(gricp_last_error()).find("empty trajectory") != std::string::npos);

  gricp_ate_report* ate = nullptr;
  REQUIRE(gricp_eval_ate(t, back, 0.01, 0, &ate) == GRICP_OK);
  CHECK(gricp_ate_size(ate) == 5);
  CHECK(gricp_ate_rmse(ate) == 0.0);
  double qs[3] = {1, 1, 1};
  REQUIRE(gricp_ate_quartiles(ate, qs) == GRICP_OK);
  CHECK(qs[1] == 0.0);
  REQUIRE(gricp_ate_write_series(ate, (dir / "series.txt").c_str()) == GRICP_OK);
  CHECK(fs::exists(dir.path / "series.txt"));
  gricp_ate_destroy(ate);

  double pc = 0;
  REQUIRE(gricp_pitch_correction(500, 0.8727, &pc) == GRICP_OK);
  CHECK(std::abs(pc - 0.1 * M_PI / 180) <= 1e-6);
  CHECK(gricp_pitch_correction(0, 1, &pc) == GRICP_ERR_INVALID_ARGUMENT);

  gricp_trajectory_destroy(back);
  gricp_trajectory_destroy(t);
}

TEST_CASE("registration through the C API") {
  std::vector<double> xyz, normals;
  planes(300, xyz, normals);
  const std::size_t n = xyz.size() / 3;
  gricp_cloud* map = nullptr;
  REQUIRE(gricp_cloud_create(xyz.data(), n, normals.data(), &map) == GRICP_OK);
  gricp_pose offset;
  gricp_pose_from_tau(0.05, 0.3, -0.2, 0.4, &offset);
  std::vector<double> moved(xyz.size());
  for (std::size_t i = 0; i < n; ++i) move(offset, &xyz[3 * i], &moved[3 * i]);
  gricp_cloud* scan = nullptr;
  REQUIRE(gricp_cloud_create(moved.data(), n, nullptr, &scan) == GRICP_OK);

  gricp_icp_config cfg;
  gricp_icp_config_defaults(&cfg);
  CHECK(cfg.mode == GRICP_MODE_4DOF);
  CHECK(cfg.max_iterations == 40);
  cfg.trim_ratio = 1.0;
  const gricp_pose id = gricp_pose_identity();
  gricp_icp_result r;
  REQUIRE(gricp_register(scan, map, &id, &cfg, &r) == GRICP_OK);
  CHECK(r.converged == 1);
  // The inverse of (yaw 0.05, t) maps the scan back.
  double back[3];
  move(r.pose, &moved[0], back);
  CHECK(std::abs(back[0] - xyz[0]) < 1e-3);
  CHECK(std::abs(back[1] - xyz[1]) < 1e-3);
  CHECK(std::abs(back[2] - xyz[2]) < 1e-3);

  std::vector<double> flat, flat_n;
  for (std::size_t i = 0; i < 200; ++i) {
    flat.insert(flat.end(), {0.01 * i, 0.013 * (i % 17), 0.0});
    flat_n.insert(flat_n.end(), {0.0, 0.0, 1.0});
  }
  gricp_cloud* plane = nullptr;
  REQUIRE(gricp_cloud_create(flat.data(), 200, flat_n.data(), &plane) == GRICP_OK);
  for (int mode : {GRICP_MODE_4DOF, GRICP_MODE_6DOF}) {
    cfg.mode = mode;
    CHECK(gricp_register(plane, plane, &id, &cfg, &r) == GRICP_ERR_DEGENERATE_GEOMETRY);
    CHECK(std::string(gricp_last_error()) == "degenerate geometry");
  }
  cfg.mode = 7;
  CHECK(gricp_register(scan, map, &id, &cfg, &r) == GRICP_ERR_INVALID_ARGUMENT);

  gricp_cloud_destroy(plane);
  gricp_cloud_destroy(scan);
  gricp_cloud_destroy(map);
}

TEST_CASE("scenario, synth and mapper through the C API") {
  gricp_scenario* s = nullptr;
  REQUIRE(gricp_scenario_create(&s) == GRICP_OK);
  REQUIRE(gricp_scenario_set(s, "scene.length", "40") == GRICP_OK);
  REQUIRE(gricp_scenario_set(s, "n_scans", "6") == GRICP_OK);
  REQUIRE(gricp_scenario_set(s, "sensor.points_per_scan", "800") == GRICP_OK);
  CHECK(gricp_scenario_set(s, "scene.colour", "red") == GRICP_ERR_PARSE);
  CHECK(gricp_scenario_set(s, "n_scans", "-3") != GRICP_OK);

  Scratch dir("synth");
  REQUIRE(gricp_synth_generate(s, 2, 0, dir.path.string().c_str()) == GRICP_OK);
  CHECK(fs::exists(dir.path / "scans" / "000005.ply"));
  CHECK_FALSE(fs::exists(dir.path / "scene_map.ply"));

  gricp_trajectory* priors = nullptr;
  REQUIRE(gricp_trajectory_read((dir / "priors.txt").c_str(), &priors) == GRICP_OK);
  REQUIRE(gricp_trajectory_size(priors) == 6);

  gricp_mapper_config mcfg;
  gricp_mapper_config_defaults(&mcfg);
  gricp_mapper* mapper = nullptr;
  REQUIRE(gricp_mapper_create(&mcfg, nullptr, &mapper) == GRICP_OK);
  for (std::size_t i = 0; i < 6; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%06zu.ply", i);
    gricp_cloud* scan = nullptr;
    REQUIRE(gricp_cloud_read((dir.path / "scans" / name).string().c_str(), &scan) == GRICP_OK);
    double stamp = 0;
    gricp_pose prior;
    gricp_trajectory_get(priors, i, &stamp, &prior);
    gricp_scan_outcome out;
    REQUIRE(gricp_mapper_process(mapper, scan, &prior, stamp, &out) == GRICP_OK);
    CHECK(out.failed == 0);
    CHECK(out.registered == (i > 0 ? 1 : 0));
    double r0, p0, y0, r1, p1, y1;
    gricp_pose_euler(&prior, &r0, &p0, &y0);
    gricp_pose_euler(&out.icp.pose, &r1, &p1, &y1);
    if (i > 0) {
      CHECK(std::abs(r1 - r0) <= 1e-12);
      CHECK(std::abs(p1 - p0) <= 1e-12);
    }
    gricp_cloud_destroy(scan);
  }
  gricp_trajectory* est = nullptr;
  REQUIRE(gricp_mapper_trajectory(mapper, &est) == GRICP_OK);
  CHECK(gricp_trajectory_size(est) == 6);
  gricp_cloud* map = nullptr;
  REQUIRE(gricp_mapper_map(mapper, &map) == GRICP_OK);
  CHECK(gricp_cloud_size(map) > 0);

  mcfg.localize_only = 1;
  gricp_mapper* loc = nullptr;
  CHECK(gricp_mapper_create(&mcfg, nullptr, &loc) == GRICP_ERR_INVALID_ARGUMENT);
  CHECK(loc == nullptr);

  gricp_cloud_destroy(map);
  gricp_trajectory_destroy(est);
  gricp_mapper_destroy(mapper);
  gricp_trajectory_destroy(priors);

  const uint64_t seeds[2] = {0, 1};
  gricp_bench_report* bench = nullptr;
  REQUIRE(gricp_bench_drift(s, seeds, 2, nullptr, &bench) == GRICP_OK);
  CHECK(gricp_bench_size(bench) == 2);
  uint64_t seed = 9;
  double e4 = -1, e6 = -1;
  REQUIRE(gricp_bench_seed(bench, 1, &seed, &e4, &e6) == GRICP_OK);
  CHECK(seed == 1);
  CHECK(e4 >= 0.0);
  CHECK(gricp_bench_wins_4dof(bench) <= 2);
  gricp_bench_destroy(bench);
  gricp_scenario_destroy(s);
}

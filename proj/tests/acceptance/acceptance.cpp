// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any
// failure.
#include <sys/wait.h>

#include <Eigen/Geometry>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "../support.hpp"
#include "gricp/error.hpp"
#include "gricp/eval.hpp"
#include "gricp/icp.hpp"
#include "gricp/io.hpp"
#include "gricp/minimizer.hpp"
#include "gricp/synth.hpp"

using namespace gricp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

// 1. Summation vs dense assembly, normal equations, gradient.
Outcome minimizer_algebra() {
  const auto t0 = Clock::now();
  Outcome o;
  double worst_assembly = 0.0, worst_normal = 0.0, worst_grad = 0.0;
  std::size_t solved = 0, degenerate = 0;
  for (int i = 0; i < 100; ++i) {
    // Sizes spread log-uniformly over 1 .. 10^4, endpoints included.
    const auto n = static_cast<std::size_t>(std::llround(std::pow(10.0, 4.0 * i / 99.0)));
    const auto set = testing::random_pairs(n);
    Eigen::Matrix4d A;
    Eigen::Vector4d b;
    testing::summation_4dof(set, A, b);
    const auto sys = assemble_4dof(set);
    worst_assembly = std::max({worst_assembly, rel(sys.A, A), rel(sys.b, b)});

    try {
      const Eigen::Vector4d x = solve_4dof(sys).as_vector();
      worst_normal = std::max(worst_normal, (sys.A * x - sys.b).norm() / sys.b.norm());
      ++solved;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateGeometry || n >= 4) {
        o.pass = false;
        o.detail += fmt(" unexpected solve failure at n=%zu;", n);
      }
      ++degenerate;
    }

    const double h = 1e-5;
    for (int k = 0; k < 4; ++k) {
      Eigen::Vector4d e = Eigen::Vector4d::Zero();
      e[k] = h;
      const double fd = (residual_error(set, Tau4::from_vector(e)) -
                         residual_error(set, Tau4::from_vector(-e))) / (2 * h);
      const double g = -2.0 * sys.b[k];
      worst_grad = std::max(worst_grad, std::abs(fd - g) / std::max(1.0, std::abs(g)));
    }
  }
  const double elapsed = seconds_since(t0);
  o.pass = o.pass && worst_assembly <= 1e-10 && worst_normal <= 1e-8 && worst_grad <= 1e-6 &&
           elapsed < 10.0;
  o.detail = fmt("assembly rel %.2e (<=1e-10), normal-eq rel %.2e (<=1e-8), gradient %.2e (<=1e-6), "
                 "%zu solved, %zu below rank, %.2f s (<10)",
                 worst_assembly, worst_normal, worst_grad, solved, degenerate, elapsed) + o.detail;
  return o;
}

PointCloud displaced(const PointCloud& map, const RigidTransform& offset) {
  std::vector<Vec3> pts;
  for (const auto& p : map.points()) pts.push_back(offset.apply(p));
  return PointCloud(std::move(pts));
}

IcpConfig icp_config(IcpMode mode) {
  IcpConfig c;
  c.mode = mode;
  c.match_params.trim_ratio = 1.0;
  return c;
}

// 2. Known-offset recovery in both modes.
Outcome transform_recovery() {
  const PointCloud map = three_planes_cloud(400, 2.0, 11);
  const RigidTransform off4 = RigidTransform::from_yaw(0.05, Vec3(0.3, -0.2, 0.4));
  const IcpResult r4 = register_scan(displaced(map, off4), map, RigidTransform::identity(),
                                     icp_config(IcpMode::kFourDof));
  const RigidTransform d4 = off4 * r4.transform;

  const Vec3 rot(0.01, -0.01, 0.02);
  const RigidTransform off6(Eigen::Quaterniond(Eigen::AngleAxisd(rot.norm(), rot.normalized())),
                            Vec3(0.1, -0.05, 0.2));
  const IcpResult r6 = register_scan(displaced(map, off6), map, RigidTransform::identity(),
                                     icp_config(IcpMode::kSixDof));
  const RigidTransform d6 = off6 * r6.transform;

  Outcome o;
  const double t4 = (r4.transform.translation() - off4.inverse().translation()).norm();
  const double t6 = (r6.transform.translation() - off6.inverse().translation()).norm();
  o.pass = t4 < 1e-3 && d4.rotation_angle() < 1e-4 && r4.iterations <= 40 && r4.converged &&
           t6 < 1e-3 && d6.rotation_angle() < 1e-4 && r6.converged;
  o.detail = fmt("4-DOF %.2e m / %.2e rad in %d it; 6-DOF %.2e m / %.2e rad in %d it "
                 "(<1e-3 m, <1e-4 rad, <=40 it)",
                 t4, d4.rotation_angle(), r4.iterations, t6, d6.rotation_angle(), r6.iterations);
  return o;
}

// 3. Registration half; the mapping half comes from the drift benchmark.
double register_rollpitch_deviation() {
  const PointCloud map = three_planes_cloud(400, 2.0, 11);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const RigidTransform offset = RigidTransform::from_euler(
        testing::uniform(-0.05, 0.05), testing::uniform(-0.05, 0.05), testing::uniform(-0.1, 0.1),
        testing::random_vec(-0.2, 0.2));
    const RigidTransform prior = RigidTransform::from_euler(
        testing::uniform(-0.1, 0.1), testing::uniform(-0.1, 0.1), testing::uniform(-0.1, 0.1),
        testing::random_vec(-0.1, 0.1));
    const IcpResult r = register_scan(displaced(map, offset), map, prior, icp_config(IcpMode::kFourDof));
    worst = std::max({worst, std::abs(r.transform.roll() - prior.roll()),
                      std::abs(r.transform.pitch() - prior.pitch())});
  }
  return worst;
}

// 4. Single plane in both modes.
Outcome degeneracy() {
  const PointCloud plane = plane_cloud(500, 3.0, 2);
  const PointCloud lifted = displaced(plane, RigidTransform::from_translation(Vec3(0, 0, 0.1)));
  Outcome o;
  for (auto mode : {IcpMode::kFourDof, IcpMode::kSixDof}) {
    const char* name = mode == IcpMode::kFourDof ? "4-DOF" : "6-DOF";
    try {
      const IcpResult r = register_scan(lifted, plane, RigidTransform::identity(), icp_config(mode));
      o.pass = false;
      o.detail += fmt("%s returned a pose after %d iterations; ", name, r.iterations);
    } catch (const Error& e) {
      const bool ok = e.code() == ErrorCode::kDegenerateGeometry &&
                      std::string(e.what()) == "degenerate geometry";
      o.pass = o.pass && ok;
      o.detail += fmt("%s -> \"%s\"; ", name, e.what());
    }
  }
  return o;
}

// 6. Evaluation examples.
Outcome evaluation() {
  Trajectory ref;
  Vec3 pos = Vec3::Zero();
  for (int i = 0; i < 50; ++i) {
    ref.append(i, RigidTransform::from_euler(0.01 * i, -0.02, 0.1 * i, pos));
    pos += Vec3(1.0, 0.2 * std::sin(i), 0.05);
  }
  const AteReport self = compute_ate(associate(ref, ref, 1e-6));
  double self_max = self.max_norm();
  for (double q : self.quartiles_normalized) self_max = std::max(self_max, std::abs(q));

  Trajectory est;
  for (const auto& e : ref.entries()) {
    est.append(e.stamp, RigidTransform(e.pose.rotation(), e.pose.translation() + Vec3(0, 0, 1)));
  }
  const AteReport off = compute_ate(associate(est, ref, 1e-6));
  double off_dev = 0.0;
  for (const auto& e : off.per_pose) {
    off_dev = std::max({off_dev, std::abs(e.e_xyz.z() - 1.0), std::abs(e.e_norm - 1.0)});
  }
  const double pc = pitch_correction(500.0, 0.8727);
  const double pc_err = std::abs(pc - 0.1 * std::numbers::pi / 180.0);

  Outcome o;
  o.pass = self_max == 0.0 && off_dev <= 1e-12 && pc_err <= 1e-6;
  o.detail = fmt("self ATE %.1e (==0), z-offset deviation %.1e (<=1e-12), pitch_correction(500, 0.8727) "
                 "= %.7f rad, error %.1e (<=1e-6)",
                 self_max, off_dev, pc, pc_err);
  return o;
}

std::string slurp(const fs::path& p) { return testing::slurp(p); }

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = "'" + std::string(GRICP_CLI_PATH) + "' " + args + " >'" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::pair<std::string, std::string>> tree(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out.emplace_back(fs::relative(e.path(), dir).string(), slurp(e.path()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// 7. Each CLI command twice, identical inputs, separate output trees.
Outcome determinism() {
  testing::TempDir root("acceptance_det");
  const std::string fx = std::string(GRICP_FIXTURE_DIR) + "/three_planes/";
  const std::string small = "--set scene.length=50 --set n_scans=10 --set sensor.points_per_scan=1000";
  // Shared inputs, produced once.
  const fs::path in = root.path() / "inputs";
  if (run_cli("synth --seeds 5 --scene-map " + small + " --out '" + in.string() + "'", root / "setup.log") != 0) {
    return {false, "could not generate inputs"};
  }
  const std::string seq = (in / "seed_5").string();

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"register", "register --scan " + fx + "scan.ply --map " + fx + "map.ply --out OUT/pose.txt"},
      {"map", "map --scans " + seq + "/scans --priors " + seq + "/priors.txt --keep-ratio 0.7 --out OUT"},
      {"localize", "localize --scans " + seq + "/scans --priors " + seq + "/priors.txt --ref-map " + seq +
                       "/scene_map.ply --out OUT"},
      {"eval-ate", "eval-ate --est " + seq + "/priors.txt --ref " + seq + "/truth.txt --out OUT"},
      {"synth", "synth --seeds 0,7 --scene-map " + small + " --out OUT"},
      {"bench-drift", "bench-drift --seeds 0-2 " + small + " --out OUT"},
  };
  Outcome o;
  std::size_t files = 0;
  for (const auto& [name, args] : commands) {
    std::vector<std::vector<std::pair<std::string, std::string>>> trees;
    for (const char* rep : {"a", "b"}) {
      const fs::path out = root.path() / name / rep;
      fs::create_directories(out);
      std::string cmd = args;
      for (auto pos = cmd.find("OUT"); pos != std::string::npos; pos = cmd.find("OUT")) {
        cmd.replace(pos, 3, "'" + out.string() + "'");
      }
      const int code = run_cli(cmd, out / "stdout.txt");
      if (code != 0) {
        o.pass = false;
        o.detail += " " + name + " exited " + std::to_string(code) + ";";
      }
      trees.push_back(tree(out));
    }
    files += trees[0].size();
    if (trees[0] != trees[1] || trees[0].size() < 2) {
      o.pass = false;
      o.detail += " " + name + " outputs differ;";
    }
  }
  o.detail = fmt("6 commands run twice, %zu output files (stdout included) compared byte for byte", files) +
             o.detail;
  return o;
}

// 8. Round trips and line-numbered parse errors.
Outcome io_checks() {
  std::vector<Vec3> pts, normals;
  for (int i = 0; i < 1000; ++i) {
    pts.push_back(testing::random_vec(-100, 100));
    normals.push_back(testing::random_unit());
  }
  const PointCloud cloud(pts, normals);
  std::ostringstream cs;
  write_cloud(cs, cloud);
  std::istringstream cin_(cs.str());
  const PointCloud back = read_cloud(cin_);
  bool cloud_ok = back.size() == cloud.size() && back.has_normals();
  for (std::size_t i = 0; cloud_ok && i < cloud.size(); ++i) {
    cloud_ok = back.point(i) == cloud.point(i) && (back.normal(i) - cloud.normal(i)).norm() <= 1e-15;
  }

  Trajectory traj;
  for (int i = 0; i < 100; ++i) {
    traj.append(0.1 * i, RigidTransform::from_euler(testing::uniform(-3, 3), testing::uniform(-1.5, 1.5),
                                                    testing::uniform(-3, 3), testing::random_vec(-1e3, 1e3)));
  }
  std::ostringstream ts;
  write_trajectory(ts, traj);
  std::istringstream tin(ts.str());
  const Trajectory tback = read_trajectory(tin);
  double traj_err = tback.size() == traj.size() ? 0.0 : 1.0;
  for (std::size_t i = 0; i < std::min(traj.size(), tback.size()); ++i) {
    traj_err = std::max({traj_err, std::abs(tback[i].stamp - traj[i].stamp),
                         (tback[i].pose.translation() - traj[i].pose.translation()).norm(),
                         tback[i].pose.rotation().angularDistance(traj[i].pose.rotation())});
  }

  auto message = [](const std::function<void()>& fn) -> std::string {
    try {
      fn();
    } catch (const Error& e) {
      return e.what();
    }
    return "<no error>";
  };
  const std::string bad_cloud = message([] {
    std::istringstream in("ply\nformat ascii 1.0\nelement vertex 2\nproperty double x\nproperty double y\n"
                          "property double z\nend_header\n1 2 3\n4 5\n");
    read_cloud(in, "bad.ply");
  });
  const std::string bad_traj = message([] {
    std::istringstream in("# stamp tx ty tz qx qy qz qw\n0 0 0 0 0 0 0 1\n1 0 0 0 0 0 1\n");
    read_trajectory(in, "bad.txt");
  });
  const std::string empty_traj = message([] {
    std::istringstream in("# nothing\n");
    read_trajectory(in, "empty.txt");
  });
  Outcome o;
  o.pass = cloud_ok && traj_err <= 1e-12 && bad_cloud.starts_with("bad.ply: line 9:") &&
           bad_traj.starts_with("bad.txt: line 3:") && empty_traj == "empty.txt: empty trajectory";
  o.detail = fmt("cloud round trip %s, trajectory round trip max error %.1e (<=1e-12); ",
                 cloud_ok ? "exact" : "LOSSY", traj_err) +
             "\"" + bad_cloud + "\"; \"" + bad_traj + "\"";
  return o;
}

Outcome guarded(const std::function<Outcome()>& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return {false, std::string("exception: ") + e.what()};
  }
}

}  // namespace

int main() {
  std::vector<Outcome> results(8);
  results[0] = guarded(minimizer_algebra);
  results[1] = guarded(transform_recovery);
  results[3] = guarded(degeneracy);

  // Criterion 3 reuses the mapping runs of 5.
  double mapping_dev = 0.0;
  std::size_t mapping_runs = 0;
  results[4] = guarded([&] {
    const auto t0 = Clock::now();
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = 0; s < 10; ++s) seeds.push_back(s);
    const DriftReport r = run_drift_benchmark(Scenario(), seeds);
    const double elapsed = seconds_since(t0);
    for (const auto& run : r.runs) mapping_dev = std::max(mapping_dev, run.four_dof.max_rollpitch_deviation);
    mapping_runs = r.runs.size();
    const double ratio = r.median_final_abs_ez_4dof / r.median_final_abs_ez_6dof;
    Outcome o;
    o.pass = ratio <= 0.5 && r.wins_4dof >= 9 && elapsed < 120.0;
    o.detail = fmt("median final |e_z| 4-DOF %.4f m vs 6-DOF %.4f m, ratio %.3f (<=0.5), 4-DOF wins %zu/10 "
                   "(>=9), %.1f s (<120)",
                   r.median_final_abs_ez_4dof, r.median_final_abs_ez_6dof, ratio, r.wins_4dof, elapsed);
    return o;
  });

  results[2] = guarded([&] {
    const double reg_dev = register_rollpitch_deviation();
    Outcome o;
    o.pass = reg_dev <= 1e-12 && mapping_dev <= 1e-12 && mapping_runs == 10;
    o.detail = fmt("max |roll/pitch - prior| %.1e over 50 registrations, %.1e over %zu 200-scan mapping runs "
                   "(<=1e-12)",
                   reg_dev, mapping_dev, mapping_runs);
    return o;
  });
  results[5] = guarded(evaluation);
  results[6] = guarded(determinism);
  results[7] = guarded(io_checks);

  const char* names[8] = {"minimizer algebra", "transform recovery", "gravity pinning", "degeneracy handling",
                          "drift benchmark", "evaluation correctness", "determinism", "I/O"};
  int failed = 0;
  for (int i = 0; i < 8; ++i) {
    std::cout << (results[i].pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << names[i]
              << "): " << results[i].detail << '\n';
    failed += results[i].pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}

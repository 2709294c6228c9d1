#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gricp/eval.hpp"
#include "gricp/io.hpp"
#include "gricp/mapper.hpp"
#include "gricp/types.hpp"

namespace gricp {

enum class SceneKind { kTunnel, kCorridor, kTerrainStrip };

/// Analytic world spanning x in [0, length]; floor at z = 0 except for the
/// terrain strip, whose ground is a smooth height field.
struct Scene {
  SceneKind kind = SceneKind::kTunnel;
  double length = 230.0;
  /// Corridor and terrain strip width.
  double width = 6.0;
  /// Corridor ceiling height.
  double height = 4.0;
  /// Tunnel bore radius and height of its axis above the floor.
  double radius = 3.0;
  double axis_height = 1.2;
  /// Box-shaped wall features every `feature_spacing` metres (0 disables);
  /// they make travel along the axis observable.
  double feature_spacing = 5.0;
  double feature_size = 0.6;
  double terrain_amplitude = 0.4;
  double terrain_wavelength = 9.0;
  /// Points per square metre for sample_surface().
  double density = 20.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SurfaceHit {
  double range = 0.0;
  Vec3 point;
  Vec3 normal;
};

/// Scene with its seeded features laid out; answers ray casts and surface
/// membership exactly.
class SceneModel {
 public:
  explicit SceneModel(const Scene& scene);

  const Scene& scene() const noexcept { return scene_; }

  std::optional<SurfaceHit> raycast(const Vec3& origin, const Vec3& direction,
                                    double max_range) const;
  /// True when p lies in free space (inside the scene, outside features).
  bool inside(const Vec3& p, double margin = 0.0) const;
  /// True when p lies within tol of a visible surface.
  bool on_surface(const Vec3& p, double tol) const;
  /// Ground height under (x, y): 0 except on the terrain strip.
  double ground_height(double x, double y) const;
  /// Uniform random samples at `density` with exact normals, seeded.
  PointCloud sample_surface() const;

 private:
  struct Box {
    Vec3 lo;
    Vec3 hi;
  };

  std::optional<SurfaceHit> raycast_bore(const Vec3& o, const Vec3& d, double max_range) const;
  std::optional<SurfaceHit> raycast_terrain(const Vec3& o, const Vec3& d, double max_range) const;
  bool inside_bore(const Vec3& p, double margin) const;
  Vec3 terrain_normal(double x, double y) const;

  Scene scene_;
  std::vector<Box> features_;
  std::array<double, 3> phase_{0.0, 0.0, 0.0};
};

struct SensorModel {
  double max_range = 20.0;
  double range_noise_sigma = 0.03;
  std::size_t points_per_scan = 2000;
  /// Elevation band in degrees; [-90, 90] is the full sphere.
  double min_elevation_deg = -45.0;
  double max_elevation_deg = 45.0;

  void validate() const;
};

/// How the mapper's prior deviates from the truth. Translation is dead
/// reckoned from noisy odometry increments; yaw drifts linearly; roll and
/// pitch carry only small independent attitude noise.
struct PriorModel {
  double odom_translation_noise_sigma = 0.02;
  double yaw_drift_per_scan = 0.0005;
  double rollpitch_noise_sigma = 0.0005;

  void validate() const;
};

/// Path along the scene axis with a gentle lateral weave.
struct PathSpec {
  double start_x = 10.0;
  /// Metres travelled per scan.
  double step = 1.0;
  /// Sensor height above the ground.
  double height = 1.0;
  double lateral_amplitude = 0.3;
  double lateral_period = 40.0;
  /// Sigma of the platform's own roll and pitch per scan (radians). These
  /// are real attitude changes, seen by the attitude prior.
  double attitude_jitter = 0.02;
  double scan_period = 0.1;

  void validate() const;
};

struct SyntheticFrame {
  PointCloud scan;
  RigidTransform prior;
  RigidTransform truth;
  double stamp = 0.0;
};

/// Ray-cast scans from the true poses with Gaussian range noise, expressed
/// in the sensor frame, plus priors per PriorModel. Deterministic per seed.
/// Throws when a pose leaves the scene.
std::vector<SyntheticFrame> generate_sequence(const Scene& scene, const PathSpec& path,
                                              const SensorModel& sensor, const PriorModel& prior,
                                              std::size_t n_scans, std::uint64_t seed);

/// Points on the planes x = 0, y = 0 and z = 0 (coordinates in
/// [0, extent]) with exact normals.
PointCloud three_planes_cloud(std::size_t points_per_plane, double extent, std::uint64_t seed);
/// Points on z = 0 with normal +z.
PointCloud plane_cloud(std::size_t points, double extent, std::uint64_t seed);

/// Everything a drift run needs; loadable from a key = value file.
struct Scenario {
  Scene scene;
  PathSpec path;
  SensorModel sensor;
  PriorModel prior;
  std::size_t n_scans = 200;
  MapperConfig mapper;

  Scenario();
  static Scenario from_config(const KeyValueConfig& cfg);
  static Scenario load(const std::filesystem::path& path);
  static std::vector<std::string> known_keys();
  void validate() const;
};

/// Mapper settings from the same key = value vocabulary (icp.*, match.*,
/// mapper.*); unspecified keys keep `base`.
MapperConfig mapper_config_from(const KeyValueConfig& cfg, const MapperConfig& base);
std::vector<std::string> mapper_config_keys();

struct ModeRun {
  Trajectory estimate;
  AteReport ate;
  std::size_t failures = 0;
  /// Largest |roll - prior roll| or |pitch - prior pitch| over the run.
  double max_rollpitch_deviation = 0.0;
};

struct SeedRun {
  std::uint64_t seed = 0;
  Trajectory truth;
  Trajectory priors;
  ModeRun four_dof;
  ModeRun six_dof;
};

struct DriftReport {
  std::vector<SeedRun> runs;
  double median_final_abs_ez_4dof = 0.0;
  double median_final_abs_ez_6dof = 0.0;
  std::size_t wins_4dof = 0;
  /// Normalized ATE quartiles pooled over all poses of all seeds.
  std::array<double, 3> pooled_quartiles_4dof{0.0, 0.0, 0.0};
  std::array<double, 3> pooled_quartiles_6dof{0.0, 0.0, 0.0};
};

/// Runs the mapper in both modes on identical inputs for every seed.
DriftReport run_drift_benchmark(const Scenario& scenario, const std::vector<std::uint64_t>& seeds);

/// Writes report.txt plus per-seed trajectories and ATE series under dir.
void write_drift_report(const DriftReport& report, const std::filesystem::path& dir);

/// Writes scans/NNNN.ply, priors.txt, truth.txt for one seed under dir.
void write_sequence(const std::vector<SyntheticFrame>& frames, const std::filesystem::path& dir);

}  // namespace gricp

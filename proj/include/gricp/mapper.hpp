#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gricp/error.hpp"
#include "gricp/icp.hpp"
#include "gricp/kdtree.hpp"
#include "gricp/types.hpp"

namespace gricp {

struct MapperConfig {
  IcpConfig icp;
  /// Aligned points closer than this to the map are not inserted.
  double insertion_min_spacing = 0.1;
  double scan_keep_ratio = 1.0;
  std::size_t normal_k = 10;
  /// Register against a frozen reference map; never insert.
  bool localize_only = false;
  std::uint64_t seed = 0;

  void validate() const;
};

/// A scan whose registration threw; its pose fell back to the prior.
struct ScanFailure {
  std::size_t scan_index = 0;
  double stamp = 0.0;
  ErrorCode code = ErrorCode::kNoCorrespondences;
  std::string message;
};

struct ScanOutcome {
  IcpResult icp;
  /// False for the bootstrap scan and for failed scans.
  bool registered = false;
  bool failed = false;
  std::size_t inserted = 0;
};

struct MapState {
  PointCloud cloud;
  std::optional<KdTree> index;
  Trajectory pose_log;
  std::vector<ScanFailure> failures;
};

/// Incremental scan-to-map front-end. Each scan is subsampled, pre-aligned
/// with its prior, registered against the map and, unless localizing, its
/// new points are inserted with fresh normals.
class Mapper {
 public:
  explicit Mapper(MapperConfig config);
  /// Starts from a reference map (normals are estimated when absent). With
  /// localize_only the reference stays bit-identical for the whole run.
  Mapper(MapperConfig config, PointCloud reference_map);

  ScanOutcome process_scan(const PointCloud& scan, const RigidTransform& prior, double stamp);

  const MapState& state() const noexcept { return state_; }
  const MapperConfig& config() const noexcept { return config_; }
  std::size_t scans_processed() const noexcept { return state_.pose_log.size(); }

 private:
  std::size_t insert(const PointCloud& aligned, const Vec3& sensor_origin);

  MapperConfig config_;
  MapState state_;
};

struct ScanFrame {
  PointCloud scan;
  RigidTransform prior;
  double stamp = 0.0;
};

struct SequenceResult {
  MapState state;
  Trajectory trajectory;
  std::vector<ScanOutcome> outcomes;
};

/// Folds process_scan over time-ordered frames.
SequenceResult run_sequence(std::span<const ScanFrame> frames, const MapperConfig& config,
                            const PointCloud* reference_map = nullptr);

}  // namespace gricp

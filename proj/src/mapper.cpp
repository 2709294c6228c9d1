#include "gricp/mapper.hpp"

#include <array>
#include <cmath>
#include <unordered_map>
#include <utility>

#include "gricp/preprocessing.hpp"
#include "gricp/random.hpp"

namespace gricp {

namespace {

// Hash grid with cell size equal to the spacing; a point can only conflict
// with points in the 27 surrounding cells.
class SpacingGrid {
 public:
  explicit SpacingGrid(double spacing) : spacing_(spacing) {}

  bool has_neighbor_within(const Vec3& p) const {
    const auto c = cell(p);
    const double sq = spacing_ * spacing_;
    for (long dx = -1; dx <= 1; ++dx) {
      for (long dy = -1; dy <= 1; ++dy) {
        for (long dz = -1; dz <= 1; ++dz) {
          const auto it = cells_.find(key(c[0] + dx, c[1] + dy, c[2] + dz));
          if (it == cells_.end()) continue;
          for (const auto& q : it->second) {
            if ((q - p).squaredNorm() < sq) return true;
          }
        }
      }
    }
    return false;
  }

  void add(const Vec3& p) {
    const auto c = cell(p);
    cells_[key(c[0], c[1], c[2])].push_back(p);
  }

 private:
  std::array<long, 3> cell(const Vec3& p) const {
    return {static_cast<long>(std::floor(p.x() / spacing_)),
            static_cast<long>(std::floor(p.y() / spacing_)),
            static_cast<long>(std::floor(p.z() / spacing_))};
  }
  static std::uint64_t key(long x, long y, long z) {
    const auto u = [](long v) { return static_cast<std::uint64_t>(v) & 0x1fffffULL; };
    return (u(x) << 42) | (u(y) << 21) | u(z);
  }

  double spacing_;
  std::unordered_map<std::uint64_t, std::vector<Vec3>> cells_;
};

}  // namespace

void MapperConfig::validate() const {
  icp.validate();
  if (!(insertion_min_spacing >= 0.0) || !std::isfinite(insertion_min_spacing)) {
    throw Error(ErrorCode::kInvalidArgument, "insertion_min_spacing must be >= 0");
  }
  if (!(scan_keep_ratio > 0.0 && scan_keep_ratio <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "scan_keep_ratio must be in (0, 1]");
  }
  if (normal_k < 3) throw Error(ErrorCode::kInvalidArgument, "normal_k must be at least 3");
}

Mapper::Mapper(MapperConfig config) : config_(std::move(config)) {
  config_.validate();
  if (config_.localize_only) {
    throw Error(ErrorCode::kInvalidArgument, "localization requires a reference map");
  }
}

Mapper::Mapper(MapperConfig config, PointCloud reference_map) : config_(std::move(config)) {
  config_.validate();
  if (reference_map.empty()) throw Error(ErrorCode::kEmptyReference, "empty reference cloud");
  if (!reference_map.has_normals()) {
    NormalEstimationParams params;
    params.k_neighbors = config_.normal_k;
    reference_map = estimate_normals(reference_map, params);
  }
  state_.cloud = std::move(reference_map);
  state_.index.emplace(state_.cloud.points());
}

ScanOutcome Mapper::process_scan(const PointCloud& scan, const RigidTransform& prior,
                                 double stamp) {
  if (scan.empty()) throw Error(ErrorCode::kInvalidArgument, "scan is empty");
  const std::size_t scan_index = state_.pose_log.size();
  if (scan_index > 0 && !(stamp > state_.pose_log.back().stamp)) {
    throw Error(ErrorCode::kInvalidArgument, "scan stamps must be strictly increasing");
  }
  const PointCloud sub =
      random_subsample(scan, config_.scan_keep_ratio, derive_seed(config_.seed, scan_index));

  ScanOutcome outcome;
  outcome.icp.transform = prior;
  if (state_.cloud.empty()) {
    outcome.icp.converged = true;
  } else {
    try {
      outcome.icp = register_scan(sub, state_.cloud, *state_.index, prior, config_.icp);
      outcome.registered = true;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoCorrespondences &&
          e.code() != ErrorCode::kDegenerateGeometry) {
        throw;
      }
      outcome.failed = true;
      outcome.icp = IcpResult{};
      outcome.icp.transform = prior;
      state_.failures.push_back({scan_index, stamp, e.code(), e.what()});
    }
  }

  const RigidTransform& pose = outcome.icp.transform;
  if (!config_.localize_only && !outcome.failed) {
    outcome.inserted = insert(apply_transform(pose, sub), pose.translation());
  }
  state_.pose_log.append(stamp, pose);
  return outcome;
}

std::size_t Mapper::insert(const PointCloud& aligned, const Vec3& sensor_origin) {
  const double spacing = config_.insertion_min_spacing;
  std::vector<Vec3> fresh;
  fresh.reserve(aligned.size());
  SpacingGrid batch(spacing > 0.0 ? spacing : 1.0);
  for (const auto& p : aligned.points()) {
    if (spacing > 0.0) {
      if (state_.index && state_.index->nearest(p).sq_dist < spacing * spacing) continue;
      if (batch.has_neighbor_within(p)) continue;
      batch.add(p);
    }
    fresh.push_back(p);
  }
  if (fresh.empty()) return 0;

  const std::size_t old_size = state_.cloud.size();
  std::vector<Vec3> points(state_.cloud.points().begin(), state_.cloud.points().end());
  std::vector<Vec3> normals(state_.cloud.normals().begin(), state_.cloud.normals().end());
  std::vector<std::uint8_t> valid;
  valid.reserve(old_size + fresh.size());
  for (std::size_t i = 0; i < old_size; ++i) valid.push_back(state_.cloud.normal_valid(i) ? 1 : 0);
  points.insert(points.end(), fresh.begin(), fresh.end());

  // Normals of the new points come from the post-insertion neighbourhood;
  // existing normals are left untouched.
  KdTree index(points);
  for (const auto& p : fresh) {
    const auto pn = estimate_normal_at(points, index, p, config_.normal_k, sensor_origin);
    normals.push_back(pn.normal);
    valid.push_back(pn.valid ? 1 : 0);
  }
  state_.cloud = PointCloud(std::move(points), std::move(normals), std::move(valid),
                            state_.cloud.frame_id());
  state_.index.emplace(std::move(index));
  return fresh.size();
}

SequenceResult run_sequence(std::span<const ScanFrame> frames, const MapperConfig& config,
                            const PointCloud* reference_map) {
  Mapper mapper = reference_map ? Mapper(config, *reference_map) : Mapper(config);
  SequenceResult result;
  result.outcomes.reserve(frames.size());
  for (const auto& frame : frames) {
    result.outcomes.push_back(mapper.process_scan(frame.scan, frame.prior, frame.stamp));
  }
  result.state = mapper.state();
  result.trajectory = result.state.pose_log;
  return result;
}

}  // namespace gricp

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gricp/kdtree.hpp"
#include "gricp/types.hpp"

namespace gricp {

struct NormalEstimationParams {
  std::size_t k_neighbors = 10;
  /// Normals are flipped to face this point (the sensor origin).
  Vec3 orient_toward = Vec3::Zero();

  void validate() const;
};

/// Keeps round(keep_ratio * N) points chosen by a seeded permutation; the
/// survivors retain their original relative order.
PointCloud random_subsample(const PointCloud& cloud, double keep_ratio, std::uint64_t seed);

/// PCA normal per point over its k nearest neighbours (the point included).
/// Neighbourhoods with a rank-deficient spread (collinear or coincident)
/// are flagged invalid. Throws "insufficient points for normal estimation"
/// when the cloud has fewer than k points.
PointCloud estimate_normals(const PointCloud& cloud, const NormalEstimationParams& params);

struct PointNormal {
  Vec3 normal = Vec3::UnitZ();
  bool valid = false;
};

/// Normal of the neighbourhood of `query` in `points` (via `index`), used by
/// the mapper to estimate normals only for freshly inserted points.
PointNormal estimate_normal_at(std::span<const Vec3> points, const KdTree& index,
                               const Vec3& query, std::size_t k, const Vec3& orient_toward);

}  // namespace gricp

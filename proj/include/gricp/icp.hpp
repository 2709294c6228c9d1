#pragma once

#include <cstddef>

#include "gricp/kdtree.hpp"
#include "gricp/matching.hpp"
#include "gricp/types.hpp"

namespace gricp {

enum class IcpMode {
  /// Yaw and translation only; roll and pitch stay at the prior's values.
  kFourDof,
  kSixDof,
};

struct IcpConfig {
  IcpMode mode = IcpMode::kFourDof;
  int max_iterations = 40;
  double trans_epsilon = 1e-3;
  double rot_epsilon = 1e-4;
  MatchParams match_params;

  void validate() const;
};

struct IcpResult {
  /// Scan-to-world pose: the accumulated correction composed with the prior.
  RigidTransform transform;
  int iterations = 0;
  bool converged = false;
  /// Point-to-plane sum of squares of the first correspondence set at the prior.
  double initial_residual = 0.0;
  /// Point-to-plane sum of squares of the last correspondence set after the
  /// last increment.
  double final_residual = 0.0;
  std::size_t pair_count = 0;
};

/// Registers `scan` (sensor frame) onto `map` (world frame, with normals),
/// starting from `prior`. Each iteration re-matches the working copy, solves
/// one linearized step, exponentiates it exactly and applies it.
///
/// Throws "no correspondences" or "degenerate geometry" from the inner steps.
/// Hitting max_iterations is reported through `converged`, not an error.
IcpResult register_scan(const PointCloud& scan, const PointCloud& map, const KdTree& index,
                        const RigidTransform& prior, const IcpConfig& config);

/// Convenience overload that builds the map index.
IcpResult register_scan(const PointCloud& scan, const PointCloud& map,
                        const RigidTransform& prior, const IcpConfig& config);

}  // namespace gricp

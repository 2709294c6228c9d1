#include "gricp/icp.hpp"

#include <cmath>

#include "gricp/minimizer.hpp"

namespace gricp {

namespace {

double point_to_plane_sum(const CorrespondenceSet& corr, const RigidTransform& delta) {
  double sum = 0.0;
  for (const auto& c : corr.pairs) {
    const double e = (delta.apply(c.p) - c.q).dot(c.n);
    sum += e * e;
  }
  return sum;
}

// Accumulated 4-DOF correction kept as (yaw, translation) so the final pose
// is a single yaw-only quaternion applied on top of the prior.
struct YawCorrection {
  double yaw = 0.0;
  Vec3 t = Vec3::Zero();

  void prepend(const Tau4& tau) {
    t = YawRotation{tau.gamma()}.matrix() * t + tau.t();
    yaw += tau.gamma();
  }
  RigidTransform transform() const { return RigidTransform::from_yaw(yaw, t); }
};

}  // namespace

void IcpConfig::validate() const {
  if (max_iterations < 1) throw Error(ErrorCode::kInvalidArgument, "max_iterations must be >= 1");
  if (!(trans_epsilon > 0.0) || !(rot_epsilon > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "convergence epsilons must be positive");
  }
  match_params.validate();
}

IcpResult register_scan(const PointCloud& scan, const PointCloud& map, const KdTree& index,
                        const RigidTransform& prior, const IcpConfig& config) {
  config.validate();
  if (scan.empty()) throw Error(ErrorCode::kInvalidArgument, "scan is empty");
  if (map.empty()) throw Error(ErrorCode::kEmptyReference, "empty reference cloud");
  if (!map.has_normals()) throw Error(ErrorCode::kInvalidArgument, "map cloud has no normals");

  PointCloud working = apply_transform(prior, scan);
  YawCorrection yaw_correction;
  RigidTransform correction;

  IcpResult result;
  for (int it = 1; it <= config.max_iterations; ++it) {
    const CorrespondenceSet corr = match(working, index, map, config.match_params);
    if (it == 1) result.initial_residual = point_to_plane_sum(corr, RigidTransform{});

    RigidTransform delta;
    if (config.mode == IcpMode::kFourDof) {
      const Tau4 tau = solve_4dof(assemble_4dof(corr));
      delta = tau_to_transform(tau);
      yaw_correction.prepend(tau);
    } else {
      delta = tau6_to_transform(solve_6dof(corr));
      correction = delta * correction;
    }
    working = apply_transform(delta, working);

    result.iterations = it;
    result.final_residual = point_to_plane_sum(corr, delta);
    result.pair_count = corr.kept_count();
    if (delta.translation().norm() < config.trans_epsilon &&
        delta.rotation_angle() < config.rot_epsilon) {
      result.converged = true;
      break;
    }
  }

  if (config.mode == IcpMode::kFourDof) correction = yaw_correction.transform();
  result.transform = correction * prior;
  return result;
}

IcpResult register_scan(const PointCloud& scan, const PointCloud& map,
                        const RigidTransform& prior, const IcpConfig& config) {
  const KdTree index = build_index(map);
  return register_scan(scan, map, index, prior, config);
}

}  // namespace gricp

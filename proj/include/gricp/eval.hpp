#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "gricp/types.hpp"

namespace gricp {

struct PosePair {
  double stamp = 0.0;
  RigidTransform est;
  RigidTransform ref;
};

struct PoseError {
  double stamp = 0.0;
  Vec3 e_xyz = Vec3::Zero();
  double e_norm = 0.0;
  /// Path length of the reference trajectory up to this pose.
  double distance = 0.0;
};

struct AteReport {
  std::vector<PoseError> per_pose;
  /// e_norm / distance in percent, for poses at least 1 m along the path.
  std::vector<double> normalized_percent;
  /// (q1, median, q3) of normalized_percent; zeros when it is empty.
  std::array<double, 3> quartiles_normalized{0.0, 0.0, 0.0};
  /// Set when the estimate was rigidly aligned onto the reference first.
  bool aligned = false;
  RigidTransform alignment;

  double final_abs_z() const;
  double rmse() const;
  double max_norm() const;
};

/// Pairs each estimated pose with the reference pose of nearest stamp within
/// max_dt. Throws when nothing associates.
std::vector<PosePair> associate(const Trajectory& est, const Trajectory& ref, double max_dt);

/// Translational ATE in the shared world frame (est minus ref position). With
/// align, a least-squares rigid alignment of est positions onto ref positions
/// is applied first.
AteReport compute_ate(const std::vector<PosePair>& pairs, bool align = false);

/// Linear-interpolation quantile (the common "type 7" definition) of an
/// unsorted sample; q in [0, 1].
double quantile(std::vector<double> values, double q);

/// Lidar pitch correction (radians) from a closed loop's length and its
/// residual elevation mismatch. Throws when loop_length <= 0.
double pitch_correction(double loop_length, double elevation_error);

/// Writes "distance e_z e_norm" rows with a header comment.
void write_ate_series(std::ostream& out, const AteReport& report);
/// Key = value summary of a report.
void write_ate_summary(std::ostream& out, const AteReport& report);

}  // namespace gricp

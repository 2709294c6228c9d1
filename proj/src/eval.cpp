#include "gricp/eval.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <ostream>

#include "format.hpp"

namespace gricp {

namespace {

constexpr double kMinNormalizationDistance = 1.0;

}  // namespace

std::vector<PosePair> associate(const Trajectory& est, const Trajectory& ref, double max_dt) {
  if (est.empty() || ref.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "trajectories must be non-empty");
  }
  if (!(max_dt >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "max_dt must be >= 0");

  const auto entries = ref.entries();
  std::vector<PosePair> pairs;
  for (const auto& e : est.entries()) {
    const auto it = std::lower_bound(entries.begin(), entries.end(), e.stamp,
                                     [](const TimedPose& p, double s) { return p.stamp < s; });
    const TimedPose* best = nullptr;
    if (it != entries.end()) best = &*it;
    if (it != entries.begin()) {
      const TimedPose& prev = *(it - 1);
      if (!best || std::abs(prev.stamp - e.stamp) <= std::abs(best->stamp - e.stamp)) best = &prev;
    }
    if (best && std::abs(best->stamp - e.stamp) <= max_dt) {
      pairs.push_back({e.stamp, e.pose, best->pose});
    }
  }
  if (pairs.empty()) {
    throw Error(ErrorCode::kNoAssociation, "no poses associated within max_dt");
  }
  return pairs;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

AteReport compute_ate(const std::vector<PosePair>& pairs, bool align) {
  if (pairs.empty()) throw Error(ErrorCode::kInvalidArgument, "ATE needs at least one pose pair");

  AteReport report;
  report.aligned = align;
  if (align) {
    const auto n = static_cast<Eigen::Index>(pairs.size());
    Eigen::Matrix3Xd src(3, n);
    Eigen::Matrix3Xd dst(3, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      src.col(i) = pairs[static_cast<std::size_t>(i)].est.translation();
      dst.col(i) = pairs[static_cast<std::size_t>(i)].ref.translation();
    }
    if (n >= 3) {
      const Eigen::Matrix4d h = Eigen::umeyama(src, dst, false);
      report.alignment = RigidTransform::from_matrix(h.topLeftCorner<3, 3>(), h.topRightCorner<3, 1>());
    } else {
      report.alignment = RigidTransform::from_translation(dst.rowwise().mean() - src.rowwise().mean());
    }
  }

  double distance = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& pair = pairs[i];
    if (i > 0) distance += (pair.ref.translation() - pairs[i - 1].ref.translation()).norm();
    const Vec3 est = align ? report.alignment.apply(pair.est.translation()) : pair.est.translation();
    PoseError e;
    e.stamp = pair.stamp;
    e.e_xyz = est - pair.ref.translation();
    e.e_norm = e.e_xyz.norm();
    e.distance = distance;
    report.per_pose.push_back(e);
    if (distance >= kMinNormalizationDistance) {
      report.normalized_percent.push_back(100.0 * e.e_norm / distance);
    }
  }
  if (!report.normalized_percent.empty()) {
    report.quartiles_normalized = {quantile(report.normalized_percent, 0.25),
                                   quantile(report.normalized_percent, 0.5),
                                   quantile(report.normalized_percent, 0.75)};
  }
  return report;
}

double AteReport::final_abs_z() const {
  return per_pose.empty() ? 0.0 : std::abs(per_pose.back().e_xyz.z());
}

double AteReport::rmse() const {
  if (per_pose.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& e : per_pose) sum += e.e_norm * e.e_norm;
  return std::sqrt(sum / static_cast<double>(per_pose.size()));
}

double AteReport::max_norm() const {
  double m = 0.0;
  for (const auto& e : per_pose) m = std::max(m, e.e_norm);
  return m;
}

double pitch_correction(double loop_length, double elevation_error) {
  if (!(loop_length > 0.0)) throw Error(ErrorCode::kInvalidArgument, "loop_length must be positive");
  if (!std::isfinite(elevation_error)) {
    throw Error(ErrorCode::kInvalidArgument, "elevation_error must be finite");
  }
  return std::atan(elevation_error / loop_length);
}

void write_ate_series(std::ostream& out, const AteReport& report) {
  out << "# distance e_z e_norm\n";
  for (const auto& e : report.per_pose) {
    out << detail::shortest(e.distance) << ' ' << detail::shortest(e.e_xyz.z()) << ' '
        << detail::shortest(e.e_norm) << '\n';
  }
}

void write_ate_summary(std::ostream& out, const AteReport& report) {
  out << "poses = " << report.per_pose.size() << '\n';
  out << "aligned = " << (report.aligned ? "true" : "false") << '\n';
  out << "ate_rmse = " << detail::shortest(report.rmse()) << '\n';
  out << "ate_max = " << detail::shortest(report.max_norm()) << '\n';
  out << "final_abs_ez = " << detail::shortest(report.final_abs_z()) << '\n';
  out << "final_distance = "
      << detail::shortest(report.per_pose.empty() ? 0.0 : report.per_pose.back().distance) << '\n';
  out << "normalized_count = " << report.normalized_percent.size() << '\n';
  out << "normalized_q1_percent = " << detail::shortest(report.quartiles_normalized[0]) << '\n';
  out << "normalized_median_percent = " << detail::shortest(report.quartiles_normalized[1]) << '\n';
  out << "normalized_q3_percent = " << detail::shortest(report.quartiles_normalized[2]) << '\n';
}

}  // namespace gricp

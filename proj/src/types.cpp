#include "gricp/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gricp {

namespace {

constexpr double kUnitTolerance = 1e-9;
constexpr double kQuaternionTolerance = 1e-6;

bool finite(const Vec3& v) { return v.allFinite(); }

}  // namespace

UnitVector3::UnitVector3(const Vec3& v) : v_(v) {
  if (!finite(v) || std::abs(v.norm() - 1.0) > kUnitTolerance) {
    throw Error(ErrorCode::kInvalidArgument, "normal is not a unit vector");
  }
}

UnitVector3 UnitVector3::normalize(const Vec3& v) {
  const double n = v.norm();
  if (!finite(v) || !(n > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "cannot normalize a zero or non-finite vector");
  }
  return UnitVector3(v / n, Unchecked{});
}

PointCloud::PointCloud(std::vector<Vec3> points, std::string frame_id)
    : points_(std::move(points)), frame_id_(std::move(frame_id)) {
  validate();
}

PointCloud::PointCloud(std::vector<Vec3> points, std::vector<Vec3> normals,
                       std::string frame_id)
    : points_(std::move(points)),
      normals_(std::move(normals)),
      frame_id_(std::move(frame_id)),
      has_normals_(true) {
  validate();
}

PointCloud::PointCloud(std::vector<Vec3> points, std::vector<Vec3> normals,
                       std::vector<std::uint8_t> normal_valid, std::string frame_id)
    : points_(std::move(points)),
      normals_(std::move(normals)),
      normal_valid_(std::move(normal_valid)),
      frame_id_(std::move(frame_id)),
      has_normals_(true) {
  validate();
  if (normal_valid_.size() != points_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "normal validity flags must match point count");
  }
}

void PointCloud::validate() const {
  for (const auto& p : points_) {
    if (!finite(p)) throw Error(ErrorCode::kInvalidArgument, "point has non-finite coordinates");
  }
  if (!has_normals_) return;
  if (normals_.size() != points_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "normal count must match point count");
  }
  for (const auto& n : normals_) {
    if (!finite(n) || std::abs(n.norm() - 1.0) > kUnitTolerance) {
      throw Error(ErrorCode::kInvalidArgument, "normal is not a unit vector");
    }
  }
}

PointCloud PointCloud::select(std::span<const std::size_t> indices) const {
  PointCloud out;
  out.frame_id_ = frame_id_;
  out.has_normals_ = has_normals_;
  out.points_.reserve(indices.size());
  for (auto i : indices) out.points_.push_back(points_.at(i));
  if (has_normals_) {
    out.normals_.reserve(indices.size());
    for (auto i : indices) out.normals_.push_back(normals_[i]);
    if (!normal_valid_.empty()) {
      out.normal_valid_.reserve(indices.size());
      for (auto i : indices) out.normal_valid_.push_back(normal_valid_[i]);
    }
  }
  return out;
}

RigidTransform::RigidTransform(const Eigen::Quaterniond& rotation, const Vec3& translation)
    : q_(rotation), t_(translation) {
  if (!q_.coeffs().allFinite() || !finite(t_)) {
    throw Error(ErrorCode::kInvalidArgument, "transform has non-finite components");
  }
  const double n = q_.norm();
  if (std::abs(n - 1.0) > kQuaternionTolerance) {
    throw Error(ErrorCode::kInvalidArgument, "rotation quaternion is not unit norm");
  }
  q_.coeffs() /= n;
}

RigidTransform RigidTransform::from_translation(const Vec3& t) {
  return {Eigen::Quaterniond::Identity(), t};
}

RigidTransform RigidTransform::from_yaw(double yaw, const Vec3& t) {
  return {Eigen::Quaterniond(std::cos(0.5 * yaw), 0.0, 0.0, std::sin(0.5 * yaw)), t};
}

RigidTransform RigidTransform::from_euler(double roll, double pitch, double yaw, const Vec3& t) {
  const Eigen::Quaterniond q = Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
                               Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                               Eigen::AngleAxisd(roll, Vec3::UnitX());
  return {q, t};
}

RigidTransform RigidTransform::from_matrix(const Mat3& rotation, const Vec3& translation) {
  if (!rotation.allFinite() ||
      !(rotation.transpose() * rotation).isApprox(Mat3::Identity(), kQuaternionTolerance) ||
      rotation.determinant() < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "matrix is not a proper rotation");
  }
  return {Eigen::Quaterniond(rotation).normalized(), translation};
}

RigidTransform RigidTransform::inverse() const {
  const Eigen::Quaterniond qi = q_.conjugate();
  return {qi, -(qi * t_)};
}

RigidTransform RigidTransform::operator*(const RigidTransform& other) const {
  return {q_ * other.q_, q_ * other.t_ + t_};
}

double RigidTransform::roll() const {
  const Mat3 r = matrix();
  return std::atan2(r(2, 1), r(2, 2));
}

double RigidTransform::pitch() const {
  const Mat3 r = matrix();
  return std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
}

double RigidTransform::yaw() const {
  const Mat3 r = matrix();
  return std::atan2(r(1, 0), r(0, 0));
}

double RigidTransform::rotation_angle() const {
  // atan2 form stays accurate near zero, unlike acos(w).
  return 2.0 * std::atan2(q_.vec().norm(), std::abs(q_.w()));
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) { return a * b; }

PointCloud apply_transform(const RigidTransform& transform, const PointCloud& cloud) {
  const Mat3 r = transform.matrix();
  const Vec3& t = transform.translation();
  std::vector<Vec3> points;
  points.reserve(cloud.size());
  for (const auto& p : cloud.points()) points.push_back(r * p + t);
  if (!cloud.has_normals()) return PointCloud(std::move(points), cloud.frame_id());

  std::vector<Vec3> normals;
  normals.reserve(cloud.size());
  for (const auto& n : cloud.normals()) normals.push_back(r * n);
  const auto flags = cloud.normal_validity();
  if (flags.empty()) return PointCloud(std::move(points), std::move(normals), cloud.frame_id());
  return PointCloud(std::move(points), std::move(normals),
                    std::vector<std::uint8_t>(flags.begin(), flags.end()), cloud.frame_id());
}

Mat3 YawRotation::matrix() const {
  const double c = std::cos(gamma);
  const double s = std::sin(gamma);
  Mat3 r;
  r << c, -s, 0.0,
       s, c, 0.0,
       0.0, 0.0, 1.0;
  return r;
}

Tau4::Tau4(double gamma, const Vec3& t) : gamma_(gamma), t_(t) {
  if (!std::isfinite(gamma) || !finite(t)) {
    throw Error(ErrorCode::kInvalidArgument, "tau has non-finite components");
  }
}

RigidTransform tau_to_transform(const Tau4& tau) {
  return RigidTransform::from_yaw(tau.gamma(), tau.t());
}

Trajectory::Trajectory(std::vector<TimedPose> entries) {
  entries_.reserve(entries.size());
  for (auto& e : entries) append(e.stamp, e.pose);
}

void Trajectory::append(double stamp, const RigidTransform& pose) {
  if (!std::isfinite(stamp)) {
    throw Error(ErrorCode::kInvalidArgument, "trajectory stamp is not finite");
  }
  if (!entries_.empty() && !(stamp > entries_.back().stamp)) {
    throw Error(ErrorCode::kInvalidArgument, "trajectory stamps must be strictly increasing");
  }
  entries_.push_back({stamp, pose});
}

}  // namespace gricp

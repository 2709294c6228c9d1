#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gricp/error.hpp"

// World frame convention: z is the gravity-aligned "up" axis. Yaw is the
// rotation about z; roll and pitch are the gravity-observable angles.

namespace gricp {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Surface normal with a checked unit norm.
class UnitVector3 {
 public:
  /// Throws if |v| differs from 1 by more than 1e-9 or any entry is not finite.
  explicit UnitVector3(const Vec3& v);
  /// Normalizes v; throws on a zero or non-finite vector.
  static UnitVector3 normalize(const Vec3& v);

  const Vec3& vec() const noexcept { return v_; }
  double x() const noexcept { return v_.x(); }
  double y() const noexcept { return v_.y(); }
  double z() const noexcept { return v_.z(); }

 private:
  struct Unchecked {};
  UnitVector3(const Vec3& v, Unchecked) : v_(v) {}
  Vec3 v_;
};

/// Ordered 3D points with optional unit normals.
///
/// Normals may carry a validity flag: a point whose neighbourhood gave no
/// plane constraint (collinear or coincident neighbours) keeps a placeholder
/// unit normal but is excluded from matching.
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(std::vector<Vec3> points, std::string frame_id = {});
  PointCloud(std::vector<Vec3> points, std::vector<Vec3> normals,
             std::string frame_id = {});
  PointCloud(std::vector<Vec3> points, std::vector<Vec3> normals,
             std::vector<std::uint8_t> normal_valid, std::string frame_id = {});

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  bool has_normals() const noexcept { return has_normals_; }

  std::span<const Vec3> points() const noexcept { return points_; }
  std::span<const Vec3> normals() const noexcept { return normals_; }
  const Vec3& point(std::size_t i) const { return points_[i]; }
  const Vec3& normal(std::size_t i) const { return normals_[i]; }
  /// False when the normal at i was flagged degenerate; always true for
  /// clouds whose normals were supplied directly.
  bool normal_valid(std::size_t i) const {
    return normal_valid_.empty() || normal_valid_[i] != 0;
  }
  std::span<const std::uint8_t> normal_validity() const noexcept { return normal_valid_; }
  const std::string& frame_id() const noexcept { return frame_id_; }

  /// Subset in the given index order; normals and flags follow.
  PointCloud select(std::span<const std::size_t> indices) const;

 private:
  void validate() const;

  std::vector<Vec3> points_;
  std::vector<Vec3> normals_;
  std::vector<std::uint8_t> normal_valid_;
  std::string frame_id_;
  bool has_normals_ = false;
};

/// SE(3) pose: unit quaternion rotation followed by translation.
class RigidTransform {
 public:
  RigidTransform() : q_(Eigen::Quaterniond::Identity()), t_(Vec3::Zero()) {}
  /// The quaternion is normalized; throws if its norm is off by more than
  /// 1e-6 or any component is not finite.
  RigidTransform(const Eigen::Quaterniond& rotation, const Vec3& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Vec3& t);
  static RigidTransform from_yaw(double yaw, const Vec3& t = Vec3::Zero());
  /// Rz(yaw) * Ry(pitch) * Rx(roll).
  static RigidTransform from_euler(double roll, double pitch, double yaw,
                                   const Vec3& t = Vec3::Zero());
  /// R must be orthonormal with det +1 (within 1e-6).
  static RigidTransform from_matrix(const Mat3& rotation, const Vec3& translation);

  const Eigen::Quaterniond& rotation() const noexcept { return q_; }
  const Vec3& translation() const noexcept { return t_; }
  Mat3 matrix() const { return q_.toRotationMatrix(); }

  Vec3 apply(const Vec3& p) const { return q_ * p + t_; }
  Vec3 rotate(const Vec3& v) const { return q_ * v; }

  RigidTransform inverse() const;
  /// (this * other) applies `other` first.
  RigidTransform operator*(const RigidTransform& other) const;

  /// ZYX Euler angles of the rotation.
  double roll() const;
  double pitch() const;
  double yaw() const;
  /// Angle of the rotation in [0, pi].
  double rotation_angle() const;

 private:
  Eigen::Quaterniond q_;
  Vec3 t_;
};

RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
PointCloud apply_transform(const RigidTransform& transform, const PointCloud& cloud);

/// Rotation about the world z axis only.
struct YawRotation {
  double gamma = 0.0;

  /// Third row and column are exactly (0, 0, 1).
  Mat3 matrix() const;
};

/// Per-iteration 4-DOF increment: yaw and translation.
class Tau4 {
 public:
  Tau4() = default;
  Tau4(double gamma, const Vec3& t);

  double gamma() const noexcept { return gamma_; }
  const Vec3& t() const noexcept { return t_; }
  Eigen::Vector4d as_vector() const { return {gamma_, t_.x(), t_.y(), t_.z()}; }
  static Tau4 from_vector(const Eigen::Vector4d& v) { return {v[0], v.tail<3>()}; }

 private:
  double gamma_ = 0.0;
  Vec3 t_ = Vec3::Zero();
};

/// Exact exponentiation: rotation Rz(gamma), translation t.
RigidTransform tau_to_transform(const Tau4& tau);

struct TimedPose {
  double stamp = 0.0;
  RigidTransform pose;
};

/// Poses with strictly increasing stamps.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<TimedPose> entries);

  /// Throws unless stamp is greater than the last stamp.
  void append(double stamp, const RigidTransform& pose);

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const TimedPose& operator[](std::size_t i) const { return entries_[i]; }
  const TimedPose& back() const { return entries_.back(); }
  std::span<const TimedPose> entries() const noexcept { return entries_; }

 private:
  std::vector<TimedPose> entries_;
};

}  // namespace gricp

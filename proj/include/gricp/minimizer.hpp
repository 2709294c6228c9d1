#pragma once

#include <Eigen/Core>

#include "gricp/matching.hpp"
#include "gricp/types.hpp"

namespace gricp {

/// Normal equations A * tau = b of the linearized 4-DOF point-to-plane
/// objective, unknowns ordered (yaw, tx, ty, tz).
struct LinearSystem4 {
  Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
  Eigen::Vector4d b = Eigen::Vector4d::Zero();
};

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

/// Small-angle 6-DOF increment: rotation vector r, translation t.
class Tau6 {
 public:
  Tau6() = default;
  Tau6(const Vec3& r, const Vec3& t);

  const Vec3& r() const noexcept { return r_; }
  const Vec3& t() const noexcept { return t_; }

 private:
  Vec3 r_ = Vec3::Zero();
  Vec3 t_ = Vec3::Zero();
};

struct LinearSystem6 {
  Matrix6d A = Matrix6d::Zero();
  Vector6d b = Vector6d::Zero();
};

/// Lever term of the yaw column: (Gamma p) . n with Gamma the linearized
/// yaw generator, i.e. p.x * n.y - p.y * n.x.
inline double yaw_lever(const Vec3& p, const Vec3& n) { return p.x() * n.y() - p.y() * n.x(); }

/// Assembles A = G G^T and b = G h, where G stacks the per-pair columns
/// [c_k; n_k] and h stacks (q_k - p_k) . n_k. Throws on an empty set.
LinearSystem4 assemble_4dof(const CorrespondenceSet& corr);

/// Cholesky solve. Throws "degenerate geometry" when A is not safely
/// positive definite (a pivot at or below 1e-9 of the largest diagonal).
Tau4 solve_4dof(const LinearSystem4& sys);

/// 6x6 analogue with rows [p_k x n_k; n_k].
LinearSystem6 assemble_6dof(const CorrespondenceSet& corr);
Tau6 solve_6dof(const LinearSystem6& sys);
Tau6 solve_6dof(const CorrespondenceSet& corr);

/// Exact rotation exp(r) with translation t.
RigidTransform tau6_to_transform(const Tau6& tau);

/// Sum over pairs of (gamma c_k + t . n_k - d_k . n_k)^2.
double residual_error(const CorrespondenceSet& corr, const Tau4& tau);

}  // namespace gricp

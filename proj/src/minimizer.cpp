#include "gricp/minimizer.hpp"

#include <cmath>

namespace gricp {

namespace {

constexpr double kPivotTolerance = 1e-9;

// In-place lower Cholesky with a relative pivot floor. Returns false when the
// matrix is not safely positive definite.
template <int N>
bool cholesky_solve(const Eigen::Matrix<double, N, N>& a, const Eigen::Matrix<double, N, 1>& b,
                    Eigen::Matrix<double, N, 1>& x) {
  if (!a.allFinite() || !b.allFinite()) return false;
  const double scale = a.diagonal().cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) return false;
  const double floor = kPivotTolerance * scale;

  Eigen::Matrix<double, N, N> l = Eigen::Matrix<double, N, N>::Zero();
  for (int j = 0; j < N; ++j) {
    double diag = a(j, j);
    for (int k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > floor)) return false;
    l(j, j) = std::sqrt(diag);
    for (int i = j + 1; i < N; ++i) {
      double s = a(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  // L y = b, then L^T x = y.
  Eigen::Matrix<double, N, 1> y;
  for (int i = 0; i < N; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= l(i, k) * y[k];
    y[i] = s / l(i, i);
  }
  for (int i = N - 1; i >= 0; --i) {
    double s = y[i];
    for (int k = i + 1; k < N; ++k) s -= l(k, i) * x[k];
    x[i] = s / l(i, i);
  }
  return x.allFinite();
}

void require_pairs(const CorrespondenceSet& corr) {
  if (corr.empty()) throw Error(ErrorCode::kInvalidArgument, "empty correspondence set");
}

}  // namespace

Tau6::Tau6(const Vec3& r, const Vec3& t) : r_(r), t_(t) {
  if (!r.allFinite() || !t.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "tau has non-finite components");
  }
}

LinearSystem4 assemble_4dof(const CorrespondenceSet& corr) {
  require_pairs(corr);
  const auto k = static_cast<Eigen::Index>(corr.pairs.size());
  Eigen::Matrix<double, 4, Eigen::Dynamic> g(4, k);
  Eigen::VectorXd h(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& c = corr.pairs[static_cast<std::size_t>(i)];
    g(0, i) = yaw_lever(c.p, c.n);
    g.block<3, 1>(1, i) = c.n;
    h[i] = (c.q - c.p).dot(c.n);
  }
  LinearSystem4 sys;
  sys.A.noalias() = g * g.transpose();
  sys.b.noalias() = g * h;
  return sys;
}

Tau4 solve_4dof(const LinearSystem4& sys) {
  Eigen::Vector4d x;
  if (!cholesky_solve<4>(sys.A, sys.b, x)) {
    throw Error(ErrorCode::kDegenerateGeometry, "degenerate geometry");
  }
  return Tau4::from_vector(x);
}

LinearSystem6 assemble_6dof(const CorrespondenceSet& corr) {
  require_pairs(corr);
  const auto k = static_cast<Eigen::Index>(corr.pairs.size());
  Eigen::Matrix<double, 6, Eigen::Dynamic> g(6, k);
  Eigen::VectorXd h(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& c = corr.pairs[static_cast<std::size_t>(i)];
    g.block<3, 1>(0, i) = c.p.cross(c.n);
    g.block<3, 1>(3, i) = c.n;
    h[i] = (c.q - c.p).dot(c.n);
  }
  LinearSystem6 sys;
  sys.A.noalias() = g * g.transpose();
  sys.b.noalias() = g * h;
  return sys;
}

Tau6 solve_6dof(const LinearSystem6& sys) {
  Vector6d x;
  if (!cholesky_solve<6>(sys.A, sys.b, x)) {
    throw Error(ErrorCode::kDegenerateGeometry, "degenerate geometry");
  }
  return {x.head<3>(), x.tail<3>()};
}

Tau6 solve_6dof(const CorrespondenceSet& corr) { return solve_6dof(assemble_6dof(corr)); }

RigidTransform tau6_to_transform(const Tau6& tau) {
  const double angle = tau.r().norm();
  if (angle == 0.0) return RigidTransform::from_translation(tau.t());
  return {Eigen::Quaterniond(Eigen::AngleAxisd(angle, tau.r() / angle)), tau.t()};
}

double residual_error(const CorrespondenceSet& corr, const Tau4& tau) {
  double sum = 0.0;
  for (const auto& c : corr.pairs) {
    const double e =
        tau.gamma() * yaw_lever(c.p, c.n) + tau.t().dot(c.n) - (c.q - c.p).dot(c.n);
    sum += e * e;
  }
  return sum;
}

}  // namespace gricp

#include "gricp/preprocessing.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gricp/random.hpp"

namespace gricp {

namespace {

// Middle eigenvalue below this fraction of the largest means the
// neighbourhood spans at most a line.
constexpr double kDegenerateRatio = 1e-10;

}  // namespace

void NormalEstimationParams::validate() const {
  if (k_neighbors < 3) {
    throw Error(ErrorCode::kInvalidArgument, "k_neighbors must be at least 3");
  }
  if (!orient_toward.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "orientation point is not finite");
  }
}

PointCloud random_subsample(const PointCloud& cloud, double keep_ratio, std::uint64_t seed) {
  if (!(keep_ratio > 0.0 && keep_ratio <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "keep_ratio must be in (0, 1]");
  }
  const std::size_t n = cloud.size();
  const auto keep = std::min<std::size_t>(
      n, static_cast<std::size_t>(std::llround(keep_ratio * static_cast<double>(n))));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  // Partial Fisher-Yates: the first `keep` slots become a uniform sample.
  for (std::size_t i = 0; i < keep; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(order[i], order[j]);
  }
  order.resize(keep);
  std::sort(order.begin(), order.end());
  return cloud.select(order);
}

PointNormal estimate_normal_at(std::span<const Vec3> points, const KdTree& index,
                               const Vec3& query, std::size_t k, const Vec3& orient_toward) {
  const auto neighbors = index.knn(query, k);
  if (neighbors.size() < 3) return {};

  Vec3 mean = Vec3::Zero();
  for (const auto& nb : neighbors) mean += points[nb.index];
  mean /= static_cast<double>(neighbors.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& nb : neighbors) {
    const Vec3 d = points[nb.index] - mean;
    cov.noalias() += d * d.transpose();
  }
  cov /= static_cast<double>(neighbors.size());

  // Eigenvalues come back in increasing order.
  const Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
  const auto& values = solver.eigenvalues();
  PointNormal out;
  out.normal = solver.eigenvectors().col(0).normalized();
  out.valid = values[2] > 0.0 && values[1] > kDegenerateRatio * values[2];
  if (!out.normal.allFinite()) return {};
  if (out.normal.dot(orient_toward - query) < 0.0) out.normal = -out.normal;
  return out;
}

PointCloud estimate_normals(const PointCloud& cloud, const NormalEstimationParams& params) {
  params.validate();
  if (cloud.size() < params.k_neighbors) {
    throw Error(ErrorCode::kInsufficientPoints, "insufficient points for normal estimation");
  }
  const KdTree index(cloud.points());
  std::vector<Vec3> normals(cloud.size());
  std::vector<std::uint8_t> valid(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto pn = estimate_normal_at(cloud.points(), index, cloud.point(i), params.k_neighbors,
                                       params.orient_toward);
    normals[i] = pn.normal;
    valid[i] = pn.valid ? 1 : 0;
  }
  return PointCloud(std::vector<Vec3>(cloud.points().begin(), cloud.points().end()),
                    std::move(normals), std::move(valid), cloud.frame_id());
}

}  // namespace gricp

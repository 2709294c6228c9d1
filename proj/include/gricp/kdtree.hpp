#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gricp/types.hpp"

namespace gricp {

struct Neighbor {
  std::size_t index = 0;
  double sq_dist = 0.0;
};

/// Exact k-d tree over a fixed point set. Immutable after construction, so
/// concurrent queries are safe. Distance ties resolve to the lowest index.
class KdTree {
 public:
  KdTree() = default;
  /// Throws "empty reference cloud" when points is empty.
  explicit KdTree(std::span<const Vec3> points);

  std::size_t size() const noexcept { return points_.size(); }

  Neighbor nearest(const Vec3& query) const;
  /// Up to k neighbours ordered by (distance, index).
  std::vector<Neighbor> knn(const Vec3& query, std::size_t k) const;

 private:
  struct Node {
    // Leaves: [begin, end) into order_. Inner nodes: split axis/value and
    // children; begin/end span the subtree.
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = -1;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search_nearest(std::int32_t node, const Vec3& q, Neighbor& best) const;
  void search_knn(std::int32_t node, const Vec3& q, std::size_t k,
                  std::vector<Neighbor>& heap) const;

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

KdTree build_index(const PointCloud& map);

}  // namespace gricp

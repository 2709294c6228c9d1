#include "gricp/kdtree.hpp"

#include <algorithm>
#include <limits>

namespace gricp {

namespace {

constexpr std::uint32_t kLeafSize = 8;

// Strict weak order on (distance, index).
bool closer(double d_a, std::size_t i_a, double d_b, std::size_t i_b) {
  return d_a < d_b || (d_a == d_b && i_a < i_b);
}

struct HeapLess {
  bool operator()(const Neighbor& a, const Neighbor& b) const {
    return closer(a.sq_dist, a.index, b.sq_dist, b.index);
  }
};

}  // namespace

KdTree::KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
  if (points_.empty()) throw Error(ErrorCode::kEmptyReference, "empty reference cloud");
  if (points_.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::kInvalidArgument, "reference cloud too large");
  }
  order_.resize(points_.size());
  for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
  nodes_.reserve(2 * points_.size() / kLeafSize + 1);
  build(0, static_cast<std::uint32_t>(order_.size()));
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({begin, end, -1, -1, -1, 0.0});
  if (end - begin <= kLeafSize) return id;

  Vec3 lo = points_[order_[begin]];
  Vec3 hi = lo;
  for (auto i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) return id;  // all coincident; keep as a leaf

  const auto mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return points_[a][axis] < points_[b][axis];
                   });
  const double split = points_[order_[mid]][axis];

  const auto left = build(begin, mid);
  const auto right = build(mid, end);
  Node& node = nodes_[static_cast<std::size_t>(id)];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

Neighbor KdTree::nearest(const Vec3& query) const {
  Neighbor best{std::numeric_limits<std::size_t>::max(), std::numeric_limits<double>::infinity()};
  search_nearest(0, query, best);
  return best;
}

// Points left of the split have coordinate <= split, right >= split, so a
// subtree can be skipped only when the plane gap strictly exceeds the best
// distance; equal gaps may still hide a lower-index tie.
void KdTree::search_nearest(std::int32_t id, const Vec3& q, Neighbor& best) const {
  const Node& node = nodes_[static_cast<std::size_t>(id)];
  if (node.axis < 0) {
    for (auto i = node.begin; i < node.end; ++i) {
      const std::size_t idx = order_[i];
      const double d = (points_[idx] - q).squaredNorm();
      if (closer(d, idx, best.sq_dist, best.index)) best = {idx, d};
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const auto near = diff <= 0.0 ? node.left : node.right;
  const auto far = diff <= 0.0 ? node.right : node.left;
  search_nearest(near, q, best);
  if (diff * diff <= best.sq_dist) search_nearest(far, q, best);
}

std::vector<Neighbor> KdTree::knn(const Vec3& query, std::size_t k) const {
  std::vector<Neighbor> heap;
  if (k == 0) return heap;
  heap.reserve(k + 1);
  search_knn(0, query, k, heap);
  std::sort_heap(heap.begin(), heap.end(), HeapLess{});
  return heap;
}

void KdTree::search_knn(std::int32_t id, const Vec3& q, std::size_t k,
                        std::vector<Neighbor>& heap) const {
  const Node& node = nodes_[static_cast<std::size_t>(id)];
  if (node.axis < 0) {
    for (auto i = node.begin; i < node.end; ++i) {
      const std::size_t idx = order_[i];
      const double d = (points_[idx] - q).squaredNorm();
      if (heap.size() < k) {
        heap.push_back({idx, d});
        std::push_heap(heap.begin(), heap.end(), HeapLess{});
      } else if (closer(d, idx, heap.front().sq_dist, heap.front().index)) {
        std::pop_heap(heap.begin(), heap.end(), HeapLess{});
        heap.back() = {idx, d};
        std::push_heap(heap.begin(), heap.end(), HeapLess{});
      }
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const auto near = diff <= 0.0 ? node.left : node.right;
  const auto far = diff <= 0.0 ? node.right : node.left;
  search_knn(near, q, k, heap);
  if (heap.size() < k || diff * diff <= heap.front().sq_dist) search_knn(far, q, k, heap);
}

KdTree build_index(const PointCloud& map) { return KdTree(map.points()); }

}  // namespace gricp

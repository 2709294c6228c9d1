#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "gricp/kdtree.hpp"
#include "gricp/types.hpp"

namespace gricp {

/// One scan-to-map pairing; n is the map normal at q.
struct Correspondence {
  Vec3 p;
  Vec3 q;
  Vec3 n;
  double dist = 0.0;
};

struct CorrespondenceSet {
  std::vector<Correspondence> pairs;

  std::size_t kept_count() const noexcept { return pairs.size(); }
  bool empty() const noexcept { return pairs.empty(); }
};

/// Hard distance gate followed by a distance-quantile trim.
struct MatchParams {
  double max_distance = 1.0;
  double trim_ratio = 0.9;

  /// Throws unless max_distance > 0 and trim_ratio is in (0, 1].
  void validate() const;
};

/// Nearest map point for every scan point. Pairs beyond max_distance or
/// landing on a degenerate map normal are dropped; the closest
/// round(trim_ratio * n) of the rest are kept, in scan order.
/// Throws "no correspondences" when nothing survives.
CorrespondenceSet match(const PointCloud& scan, const KdTree& index, const PointCloud& map,
                        const MatchParams& params);

}  // namespace gricp

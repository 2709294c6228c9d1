#include "gricp/matching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gricp {

void MatchParams::validate() const {
  if (!(max_distance > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "max_distance must be positive");
  }
  if (!(trim_ratio > 0.0 && trim_ratio <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "trim_ratio must be in (0, 1]");
  }
}

CorrespondenceSet match(const PointCloud& scan, const KdTree& index, const PointCloud& map,
                        const MatchParams& params) {
  params.validate();
  if (!map.has_normals()) {
    throw Error(ErrorCode::kInvalidArgument, "map cloud has no normals");
  }
  if (index.size() != map.size()) {
    throw Error(ErrorCode::kInvalidArgument, "index was not built over this map");
  }

  struct Candidate {
    std::size_t scan_index;
    std::size_t map_index;
    double dist;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(scan.size());
  const double gate_sq = params.max_distance * params.max_distance;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const Neighbor nn = index.nearest(scan.point(i));
    if (!map.normal_valid(nn.index)) continue;
    if (nn.sq_dist > gate_sq) continue;
    candidates.push_back({i, nn.index, std::sqrt(nn.sq_dist)});
  }
  if (candidates.empty()) throw Error(ErrorCode::kNoCorrespondences, "no correspondences");

  auto keep = static_cast<std::size_t>(
      std::llround(params.trim_ratio * static_cast<double>(candidates.size())));
  keep = std::clamp<std::size_t>(keep, 1, candidates.size());
  if (keep < candidates.size()) {
    std::nth_element(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                     candidates.end(), [](const Candidate& a, const Candidate& b) {
                       return a.dist < b.dist || (a.dist == b.dist && a.scan_index < b.scan_index);
                     });
    candidates.resize(keep);
    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& a, const Candidate& b) { return a.scan_index < b.scan_index; });
  }

  CorrespondenceSet out;
  out.pairs.reserve(candidates.size());
  for (const auto& c : candidates) {
    out.pairs.push_back({scan.point(c.scan_index), map.point(c.map_index),
                         map.normal(c.map_index), c.dist});
  }
  return out;
}

}  // namespace gricp

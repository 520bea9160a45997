#include "ocfk/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ocfk {

SpatialIndex::SpatialIndex(std::vector<Vec3> points) : points_(std::move(points)) {
  if (points_.empty()) throw std::invalid_argument("SpatialIndex: empty point set");
  std::vector<std::uint32_t> ids(points_.size());
  std::iota(ids.begin(), ids.end(), 0u);
  nodes_.reserve(points_.size());
  root_ = build(ids, 0, ids.size(), 0);
}

std::int32_t SpatialIndex::build(std::vector<std::uint32_t>& ids, std::size_t lo, std::size_t hi,
                                 int depth) {
  if (lo >= hi) return -1;
  const std::uint8_t axis = static_cast<std::uint8_t>(depth % 3);
  const std::size_t mid = lo + (hi - lo) / 2;
  std::nth_element(ids.begin() + lo, ids.begin() + mid, ids.begin() + hi,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double va = points_[a][axis];
                     const double vb = points_[b][axis];
                     if (va != vb) return va < vb;
                     return a < b;  // stable order for duplicate coordinates
                   });
  const std::int32_t node_id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{ids[mid], -1, -1, axis});
  const std::int32_t left = build(ids, lo, mid, depth + 1);
  const std::int32_t right = build(ids, mid + 1, hi, depth + 1);
  nodes_[node_id].left = left;
  nodes_[node_id].right = right;
  return node_id;
}

NearestResult SpatialIndex::nearest(const Vec3& query) const {
  NearestResult best;
  best.index = std::numeric_limits<std::size_t>::max();
  double best_d2 = std::numeric_limits<double>::infinity();
  search(root_, query, best, best_d2);
  return best;
}

void SpatialIndex::search(std::int32_t node_id, const Vec3& query, NearestResult& best,
                          double& best_d2) const {
  if (node_id < 0) return;
  const Node& node = nodes_[node_id];
  const Vec3& p = points_[node.point_index];
  const double d2 = norm2(query - p);
  if (d2 < best_d2 || (d2 == best_d2 && node.point_index < best.index)) {
    best_d2 = d2;
    best.index = node.point_index;
    best.point = p;
    best.distance = std::sqrt(d2);
  }
  const double delta = query[node.axis] - p[node.axis];
  const std::int32_t near_side = delta < 0.0 ? node.left : node.right;
  const std::int32_t far_side = delta < 0.0 ? node.right : node.left;
  search(near_side, query, best, best_d2);
  if (delta * delta <= best_d2) search(far_side, query, best, best_d2);
}

}  // namespace ocfk

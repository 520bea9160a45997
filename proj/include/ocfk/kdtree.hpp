#pragma once

#include <cstdint>
#include <vector>

#include "ocfk/geometry.hpp"

namespace ocfk {

struct NearestResult {
  std::size_t index = 0;
  Vec3 point;
  double distance = 0.0;
};

// Balanced k-d tree over an immutable point set. Queries return the
// Euclidean-nearest point; exact ties resolve to the lowest insertion index.
class SpatialIndex {
 public:
  SpatialIndex() = default;
  explicit SpatialIndex(std::vector<Vec3> points);

  bool empty() const { return points_.empty(); }
  std::size_t size() const { return points_.size(); }
  const Vec3& point(std::size_t i) const { return points_[i]; }

  NearestResult nearest(const Vec3& query) const;

 private:
  struct Node {
    std::uint32_t point_index;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint8_t axis = 0;
  };

  std::int32_t build(std::vector<std::uint32_t>& ids, std::size_t lo, std::size_t hi, int depth);
  void search(std::int32_t node, const Vec3& query, NearestResult& best, double& best_d2) const;

  std::vector<Vec3> points_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

}  // namespace ocfk

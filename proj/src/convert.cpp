#include "ocfk/convert.hpp"

#include <limits>
#include <stdexcept>
#include <vector>

namespace ocfk {

PointCloud farthest_point_sample(const PointCloud& points, std::size_t k) {
  const std::size_t n = points.size();
  if (k < 1 || k > n) {
    throw std::invalid_argument("farthest_point_sample: k must be in [1, point count]");
  }

  Vec3 centroid{0, 0, 0};
  for (const Vec3& p : points.points) centroid += p;
  centroid = centroid / static_cast<double>(n);

  std::size_t first = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double d = norm2(points.points[i] - centroid);
    if (d < best) {
      best = d;
      first = i;
    }
  }

  std::vector<std::size_t> chosen;
  chosen.reserve(k);
  chosen.push_back(first);
  std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());

  while (chosen.size() < k) {
    const Vec3& latest = points.points[chosen.back()];
    for (std::size_t i = 0; i < n; ++i) {
      const double d = norm2(points.points[i] - latest);
      if (d < min_d2[i]) min_d2[i] = d;
    }
    std::size_t next = 0;
    double far = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (min_d2[i] > far) {
        far = min_d2[i];
        next = i;
      }
    }
    chosen.push_back(next);
  }

  PointCloud out;
  out.points.reserve(k);
  const bool with_normals = points.has_normals();
  if (with_normals) out.normals.reserve(k);
  for (std::size_t idx : chosen) {
    out.points.push_back(points.points[idx]);
    if (with_normals) out.normals.push_back(points.normals[idx]);
  }
  return out;
}

PointCloud mesh_to_pointcloud(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("mesh_to_pointcloud: n must be >= 1");
  PointCloud dense = sample_surface(mesh, 10 * n, seed);
  PointCloud cloud = farthest_point_sample(dense, n);
  cloud.normals.clear();  // edge and orientation information is dropped
  return cloud;
}

}  // namespace ocfk

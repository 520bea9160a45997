#pragma once

#include <cstdint>

#include "ocfk/geometry.hpp"

namespace ocfk {

// Greedy farthest-point subsampling: start at the point nearest the
// centroid, then repeatedly take the point with the largest distance to the
// chosen set. Ties go to the lowest index; the result is a deterministic
// subset of the input in selection order.
PointCloud farthest_point_sample(const PointCloud& points, std::size_t k);

// Mesh -> fixed-size cloud: area-weighted surface sampling at 10x the target
// count, then farthest-point subsampling down to n. Connectivity is gone;
// only surface geometry survives.
PointCloud mesh_to_pointcloud(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed);

}  // namespace ocfk

#pragma once

#include <cstdint>
#include <vector>

#include "ocfk/field.hpp"
#include "ocfk/geometry.hpp"

namespace ocfk {

// Scalar occupancy values on a regular lattice of R points per axis over
// bounds (R - 1 cells per axis).
struct OccupancyGrid {
  std::size_t points_per_axis = 0;
  Aabb bounds;
  std::vector<double> values;  // index = (z * R + y) * R + x

  double& at(std::size_t x, std::size_t y, std::size_t z) {
    return values[(z * points_per_axis + y) * points_per_axis + x];
  }
  double at(std::size_t x, std::size_t y, std::size_t z) const {
    return values[(z * points_per_axis + y) * points_per_axis + x];
  }
  Vec3 position(std::size_t x, std::size_t y, std::size_t z) const;
  std::size_t cells_per_axis() const { return points_per_axis - 1; }
};

// Dense evaluation at every lattice point; the field is queried in batches
// of at most 65536 points.
OccupancyGrid evaluate_grid(const OccupancyField& field, std::size_t points_per_axis);

struct MiseConfig {
  std::size_t initial_cells = 32;  // power of two, >= 4
  std::size_t steps = 2;           // refinement rounds; final = initial << steps
  double tau = 0.5;
};

// Multiresolution refinement: evaluate a coarse lattice, subdivide every
// cell whose corners straddle tau, and repeat. Cells never touched by the
// surface keep a propagated corner value, so marching cubes on the result
// matches the dense grid whenever each connected component of the
// superlevel set is already visible at the initial resolution.
OccupancyGrid mise_extract(const OccupancyField& field, const MiseConfig& cfg);

// Extra per-vertex edge records for verifying interpolation exactly.
struct McVertexEdge {
  double v0 = 0.0, v1 = 0.0;  // corner values of the crossing edge
  double t = 0.0;             // interpolation parameter of the vertex
};

struct McResult {
  TriangleMesh mesh;
  std::vector<McVertexEdge> vertex_edges;
};

// Standard 256-case marching cubes with edge-keyed vertex welding; vertices
// sit where linear interpolation of the corner values equals tau. Outward
// orientation (normals point toward lower occupancy).
McResult marching_cubes_detailed(const OccupancyGrid& grid, double tau);
TriangleMesh marching_cubes(const OccupancyGrid& grid, double tau);

// Convenience: MISE refinement followed by marching cubes.
TriangleMesh extract_mesh(const OccupancyField& field, const MiseConfig& cfg);

}  // namespace ocfk

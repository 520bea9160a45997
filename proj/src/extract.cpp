#include "ocfk/extract.hpp"

#include <array>
#include <bit>
#include <stdexcept>
#include <unordered_map>

#include "mc_tables.hpp"
#include "ocfk/threading.hpp"

namespace ocfk {

namespace {
constexpr std::size_t kQueryBatch = 65536;
}

Vec3 OccupancyGrid::position(std::size_t x, std::size_t y, std::size_t z) const {
  const double denom = static_cast<double>(points_per_axis - 1);
  const Vec3 ext = bounds.extent();
  return {bounds.min.x + static_cast<double>(x) * (ext.x / denom),
          bounds.min.y + static_cast<double>(y) * (ext.y / denom),
          bounds.min.z + static_cast<double>(z) * (ext.z / denom)};
}

OccupancyGrid evaluate_grid(const OccupancyField& field, std::size_t points_per_axis) {
  if (points_per_axis < 2) throw std::invalid_argument("evaluate_grid: need at least 2 points");
  OccupancyGrid grid;
  grid.points_per_axis = points_per_axis;
  grid.bounds = field.bounds();
  grid.values.assign(points_per_axis * points_per_axis * points_per_axis, 0.0);

  const std::size_t total = grid.values.size();
  parallel_for(total, kQueryBatch, [&](std::size_t begin, std::size_t end) {
    std::vector<Vec3> pts;
    pts.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t x = i % points_per_axis;
      const std::size_t y = (i / points_per_axis) % points_per_axis;
      const std::size_t z = i / (points_per_axis * points_per_axis);
      pts.push_back(grid.position(x, y, z));
    }
    field.evaluate(pts, {grid.values.data() + begin, end - begin});
  });
  return grid;
}

// ---------------------------------------------------------------------------
// MISE

OccupancyGrid mise_extract(const OccupancyField& field, const MiseConfig& cfg) {
  if (cfg.initial_cells < 4 || !std::has_single_bit(cfg.initial_cells)) {
    throw std::invalid_argument("mise: initial resolution must be a power of two >= 4");
  }
  if (!(cfg.tau > 0.0 && cfg.tau < 1.0)) {
    throw std::invalid_argument("mise: tau must be in (0, 1)");
  }

  const std::size_t final_cells = cfg.initial_cells << cfg.steps;
  const std::size_t r = final_cells + 1;  // lattice points per axis
  OccupancyGrid grid;
  grid.points_per_axis = r;
  grid.bounds = field.bounds();
  grid.values.assign(r * r * r, 0.0);

  std::vector<std::uint8_t> known(grid.values.size(), 0);
  auto point_id = [r](std::size_t x, std::size_t y, std::size_t z) {
    return (z * r + y) * r + x;
  };

  // Evaluate a batch of lattice ids that are not yet known.
  auto evaluate_ids = [&](const std::vector<std::size_t>& ids) {
    for (std::size_t start = 0; start < ids.size(); start += kQueryBatch) {
      const std::size_t count = std::min(kQueryBatch, ids.size() - start);
      std::vector<Vec3> pts(count);
      std::vector<double> vals(count);
      for (std::size_t i = 0; i < count; ++i) {
        const std::size_t id = ids[start + i];
        const std::size_t x = id % r;
        const std::size_t y = (id / r) % r;
        const std::size_t z = id / (r * r);
        pts[i] = grid.position(x, y, z);
      }
      field.evaluate(pts, vals);
      for (std::size_t i = 0; i < count; ++i) {
        grid.values[ids[start + i]] = vals[i];
        known[ids[start + i]] = 1;
      }
    }
  };

  // Coarse lattice.
  {
    const std::size_t stride = std::size_t{1} << cfg.steps;
    std::vector<std::size_t> ids;
    ids.reserve((cfg.initial_cells + 1) * (cfg.initial_cells + 1) * (cfg.initial_cells + 1));
    for (std::size_t z = 0; z < r; z += stride) {
      for (std::size_t y = 0; y < r; y += stride) {
        for (std::size_t x = 0; x < r; x += stride) ids.push_back(point_id(x, y, z));
      }
    }
    evaluate_ids(ids);
  }

  struct Cell {
    std::size_t x, y, z;  // cell coords in units of its level's stride
  };

  // A cell is active when its corners do not all classify the same way
  // (inside = value > tau).
  auto is_active = [&](const Cell& c, std::size_t stride) {
    bool any_in = false, any_out = false;
    for (int dz = 0; dz <= 1; ++dz) {
      for (int dy = 0; dy <= 1; ++dy) {
        for (int dx = 0; dx <= 1; ++dx) {
          const double v = grid.values[point_id((c.x + dx) * stride, (c.y + dy) * stride,
                                                (c.z + dz) * stride)];
          (v > cfg.tau ? any_in : any_out) = true;
        }
      }
    }
    return any_in && any_out;
  };

  // Inactive cells per level, kept for value propagation afterwards.
  std::vector<std::vector<Cell>> inactive_by_level(cfg.steps);

  std::vector<Cell> current;
  current.reserve(cfg.initial_cells * cfg.initial_cells * cfg.initial_cells);
  for (std::size_t z = 0; z < cfg.initial_cells; ++z) {
    for (std::size_t y = 0; y < cfg.initial_cells; ++y) {
      for (std::size_t x = 0; x < cfg.initial_cells; ++x) current.push_back({x, y, z});
    }
  }

  for (std::size_t level = 0; level < cfg.steps; ++level) {
    const std::size_t stride = std::size_t{1} << (cfg.steps - level);
    const std::size_t half = stride / 2;
    std::vector<Cell> active;
    for (const Cell& c : current) {
      if (is_active(c, stride)) {
        active.push_back(c);
      } else {
        inactive_by_level[level].push_back(c);
      }
    }

    // Evaluate the 3x3x3 sub-lattice of every active cell (corners are
    // already known; midpoints usually are not).
    std::vector<std::size_t> ids;
    for (const Cell& c : active) {
      for (int dz = 0; dz <= 2; ++dz) {
        for (int dy = 0; dy <= 2; ++dy) {
          for (int dx = 0; dx <= 2; ++dx) {
            const std::size_t id = point_id(c.x * stride + dx * half, c.y * stride + dy * half,
                                            c.z * stride + dz * half);
            if (!known[id]) {
              known[id] = 1;  // reserve so shared points are queried once
              ids.push_back(id);
            }
          }
        }
      }
    }
    // the reservation above marked them known; clear and evaluate for real
    for (std::size_t id : ids) known[id] = 0;
    evaluate_ids(ids);

    std::vector<Cell> children;
    children.reserve(active.size() * 8);
    for (const Cell& c : active) {
      for (int dz = 0; dz <= 1; ++dz) {
        for (int dy = 0; dy <= 1; ++dy) {
          for (int dx = 0; dx <= 1; ++dx) {
            children.push_back({2 * c.x + dx, 2 * c.y + dy, 2 * c.z + dz});
          }
        }
      }
    }
    current = std::move(children);
  }

  // Propagate a same-side corner value into every untouched lattice point of
  // each inactive block. Marching cubes sees no crossing there.
  for (std::size_t level = 0; level < cfg.steps; ++level) {
    const std::size_t stride = std::size_t{1} << (cfg.steps - level);
    for (const Cell& c : inactive_by_level[level]) {
      const double fill = grid.values[point_id(c.x * stride, c.y * stride, c.z * stride)];
      for (std::size_t dz = 0; dz <= stride; ++dz) {
        for (std::size_t dy = 0; dy <= stride; ++dy) {
          for (std::size_t dx = 0; dx <= stride; ++dx) {
            const std::size_t id =
                point_id(c.x * stride + dx, c.y * stride + dy, c.z * stride + dz);
            if (!known[id]) {
              grid.values[id] = fill;
              known[id] = 2;
            }
          }
        }
      }
    }
  }
  return grid;
}

// ---------------------------------------------------------------------------
// Marching cubes

namespace {

constexpr int kCornerOffset[8][3] = {
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
    {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
};
constexpr int kEdgeCorner[12][2] = {
    {0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
    {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7},
};

}  // namespace

McResult marching_cubes_detailed(const OccupancyGrid& grid, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw std::invalid_argument("marching_cubes: tau must be in (0, 1)");
  }
  const std::size_t r = grid.points_per_axis;
  const std::size_t cells = r - 1;

  McResult result;
  std::unordered_map<std::uint64_t, std::uint32_t> edge_vertex;
  edge_vertex.reserve(1 << 16);

  auto point_id = [r](std::size_t x, std::size_t y, std::size_t z) -> std::uint64_t {
    return (static_cast<std::uint64_t>(z) * r + y) * r + x;
  };

  std::array<double, 8> val{};
  std::array<std::uint64_t, 8> pid{};
  std::array<std::array<std::size_t, 3>, 8> pxyz{};
  std::array<std::uint32_t, 12> edge_v{};

  for (std::size_t z = 0; z < cells; ++z) {
    for (std::size_t y = 0; y < cells; ++y) {
      for (std::size_t x = 0; x < cells; ++x) {
        int cube_index = 0;
        for (int i = 0; i < 8; ++i) {
          const std::size_t cx = x + kCornerOffset[i][0];
          const std::size_t cy = y + kCornerOffset[i][1];
          const std::size_t cz = z + kCornerOffset[i][2];
          pxyz[i] = {cx, cy, cz};
          pid[i] = point_id(cx, cy, cz);
          val[i] = grid.values[pid[i]];
          if (val[i] <= tau) cube_index |= (1 << i);  // outside corners set bits
        }
        const int edge_mask = kMcEdgeTable[cube_index];
        if (edge_mask == 0) continue;

        for (int e = 0; e < 12; ++e) {
          if (!(edge_mask & (1 << e))) continue;
          const int a = kEdgeCorner[e][0];
          const int b = kEdgeCorner[e][1];
          std::uint64_t ka = pid[a], kb = pid[b];
          double va = val[a], vb = val[b];
          auto pa = pxyz[a], pb = pxyz[b];
          if (ka > kb) {
            std::swap(ka, kb);
            std::swap(va, vb);
            std::swap(pa, pb);
          }
          const std::uint64_t key = (ka << 32) | kb;
          auto it = edge_vertex.find(key);
          if (it == edge_vertex.end()) {
            const double t = (tau - va) / (vb - va);
            const Vec3 p0 = grid.position(pa[0], pa[1], pa[2]);
            const Vec3 p1 = grid.position(pb[0], pb[1], pb[2]);
            const Vec3 v{p0.x + t * (p1.x - p0.x), p0.y + t * (p1.y - p0.y),
                         p0.z + t * (p1.z - p0.z)};
            const std::uint32_t idx = static_cast<std::uint32_t>(result.mesh.vertices.size());
            result.mesh.vertices.push_back(v);
            result.vertex_edges.push_back({va, vb, t});
            it = edge_vertex.emplace(key, idx).first;
          }
          edge_v[e] = it->second;
        }

        const int* tri = kMcTriTable[cube_index];
        for (int i = 0; tri[i] != -1; i += 3) {
          // table order winds outward (toward lower occupancy) under the
          // "bit set = corner outside" convention
          result.mesh.triangles.push_back(
              {edge_v[tri[i]], edge_v[tri[i + 1]], edge_v[tri[i + 2]]});
        }
      }
    }
  }
  drop_degenerate_triangles(result.mesh);
  return result;
}

TriangleMesh marching_cubes(const OccupancyGrid& grid, double tau) {
  return marching_cubes_detailed(grid, tau).mesh;
}

TriangleMesh extract_mesh(const OccupancyField& field, const MiseConfig& cfg) {
  return marching_cubes(mise_extract(field, cfg), cfg.tau);
}

}  // namespace ocfk

#include "ocfk/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ocfk/kdtree.hpp"
#include "ocfk/rng.hpp"
#include "ocfk/threading.hpp"

namespace ocfk {

// ---------------------------------------------------------------------------
// MeshSolid

MeshSolid::MeshSolid(const TriangleMesh& mesh) : mesh_(mesh) {
  if (mesh.empty()) throw std::invalid_argument("mesh solid: empty mesh");
  const std::size_t open = open_edge_count(mesh);
  if (open != 0) {
    throw std::invalid_argument("mesh is not watertight: " + std::to_string(open) +
                                " open edges");
  }
  bounds_ = mesh_bounds(mesh);

  grid_res_ = 32;
  cells_.assign(static_cast<std::size_t>(grid_res_) * grid_res_, {});
  const Vec3 ext = bounds_.extent();
  const double pad = 1e-6 * std::max({ext.x, ext.y, ext.z, 1e-12});
  auto cell_of = [&](double v, double lo, double span) {
    const double f = (v - lo) / span;
    return std::clamp(static_cast<int>(f * grid_res_), 0, grid_res_ - 1);
  };
  const double span_y = std::max(ext.y, 1e-12);
  const double span_z = std::max(ext.z, 1e-12);
  for (std::uint32_t ti = 0; ti < mesh.triangles.size(); ++ti) {
    const Triangle& t = mesh.triangles[ti];
    double ylo = 1e300, yhi = -1e300, zlo = 1e300, zhi = -1e300;
    for (std::uint32_t vi : t) {
      const Vec3& v = mesh.vertices[vi];
      ylo = std::min(ylo, v.y);
      yhi = std::max(yhi, v.y);
      zlo = std::min(zlo, v.z);
      zhi = std::max(zhi, v.z);
    }
    const int y0 = cell_of(ylo - pad, bounds_.min.y, span_y);
    const int y1 = cell_of(yhi + pad, bounds_.min.y, span_y);
    const int z0 = cell_of(zlo - pad, bounds_.min.z, span_z);
    const int z1 = cell_of(zhi + pad, bounds_.min.z, span_z);
    for (int zy = z0; zy <= z1; ++zy) {
      for (int yy = y0; yy <= y1; ++yy) {
        cells_[static_cast<std::size_t>(zy) * grid_res_ + yy].push_back(ti);
      }
    }
  }
}

namespace {

// Möller–Trumbore; returns -1 for a clean miss, +1 for a clean hit with
// t > 0, and 0 when the answer is too close to call (retry with a new
// jitter).
int ray_hit(const Vec3& origin, const Vec3& dir, const Vec3& a, const Vec3& b, const Vec3& c) {
  constexpr double eps = 1e-12;
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 pv = cross(dir, e2);
  const double det = dot(e1, pv);
  if (std::abs(det) < eps) return std::abs(dot(a - origin, cross(e1, e2))) < eps ? 0 : -1;
  const double inv = 1.0 / det;
  const Vec3 tv = origin - a;
  const double u = dot(tv, pv) * inv;
  if (u < -eps || u > 1.0 + eps) return -1;
  const Vec3 qv = cross(tv, e1);
  const double v = dot(dir, qv) * inv;
  if (v < -eps || u + v > 1.0 + eps) return -1;
  const double t = dot(e2, qv) * inv;
  if (t < -eps) return -1;
  const bool fuzzy = u < eps || v < eps || u + v > 1.0 - eps || t < eps;
  return fuzzy ? 0 : 1;
}

}  // namespace

bool MeshSolid::inside(const Vec3& p) const {
  if (!bounds_.contains(p)) return false;
  const Vec3 ext = bounds_.extent();
  const double span_y = std::max(ext.y, 1e-12);
  const double span_z = std::max(ext.z, 1e-12);
  const int iy = std::clamp(static_cast<int>((p.y - bounds_.min.y) / span_y * grid_res_), 0,
                            grid_res_ - 1);
  const int iz = std::clamp(static_cast<int>((p.z - bounds_.min.z) / span_z * grid_res_), 0,
                            grid_res_ - 1);
  const std::vector<std::uint32_t>& candidates =
      cells_[static_cast<std::size_t>(iz) * grid_res_ + iy];

  for (int attempt = 0; attempt < 16; ++attempt) {
    // deterministic jitter schedule; attempt 0 is the plain +x ray
    const double j = 1e-7 * static_cast<double>(attempt);
    const Vec3 dir{1.0, j, j * 0.618033988749895};
    int crossings = 0;
    bool fuzzy = false;
    for (std::uint32_t ti : candidates) {
      const Triangle& t = mesh_.triangles[ti];
      const int h = ray_hit(p, dir, mesh_.vertices[t[0]], mesh_.vertices[t[1]],
                            mesh_.vertices[t[2]]);
      if (h == 0) {
        fuzzy = true;
        break;
      }
      if (h == 1) ++crossings;
    }
    if (!fuzzy) return (crossings % 2) == 1;
  }
  // every jitter grazed something; fall back to the last parity
  return false;
}

// ---------------------------------------------------------------------------
// IoU

double volumetric_iou(const Solid& a, const Solid& b, std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("volumetric_iou: need samples");
  const Aabb box = Aabb::hull(a.bounds(), b.bounds());
  Rng rng(seed);
  std::uint64_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Vec3 p{rng.uniform(box.min.x, box.max.x), rng.uniform(box.min.y, box.max.y),
                 rng.uniform(box.min.z, box.max.z)};
    const bool ia = a.inside(p);
    const bool ib = b.inside(p);
    inter += (ia && ib);
    uni += (ia || ib);
  }
  if (uni == 0) return 1.0;  // both empty
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double volumetric_iou(const TriangleMesh& a, const TriangleMesh& b, std::size_t n_samples,
                      std::uint64_t seed) {
  const MeshSolid sa(a);
  const MeshSolid sb(b);
  return volumetric_iou(sa, sb, n_samples, seed);
}

// ---------------------------------------------------------------------------
// Chamfer / normal consistency

namespace {

// mean over a of distance to nearest point in index_b; optionally also the
// mean |cos| between corresponding normals
void directed_stats(const PointCloud& a, const SpatialIndex& index_b, const PointCloud& b,
                    bool with_normals, double& mean_dist, double& mean_cos) {
  const std::size_t n = a.size();
  std::vector<double> dist(n), cosv(with_normals ? n : 0);
  parallel_for(n, 2048, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const NearestResult nn = index_b.nearest(a.points[i]);
      dist[i] = nn.distance;
      if (with_normals) cosv[i] = std::abs(dot(a.normals[i], b.normals[nn.index]));
    }
  });
  double sd = 0.0, sc = 0.0;
  for (std::size_t i = 0; i < n; ++i) sd += dist[i];
  for (double v : cosv) sc += v;
  mean_dist = sd / static_cast<double>(n);
  mean_cos = with_normals ? sc / static_cast<double>(n) : 0.0;
}

}  // namespace

double chamfer_l1(const PointCloud& a, const PointCloud& b) {
  if (a.size() == 0 || b.size() == 0) throw std::invalid_argument("chamfer: empty point cloud");
  const SpatialIndex ia(a.points);
  const SpatialIndex ib(b.points);
  double dab = 0.0, dba = 0.0, unused = 0.0;
  directed_stats(a, ib, b, false, dab, unused);
  directed_stats(b, ia, a, false, dba, unused);
  return 0.5 * dab + 0.5 * dba;
}

double chamfer_l1(const TriangleMesh& a, const TriangleMesh& b, std::size_t n_points,
                  std::uint64_t seed) {
  if (a.empty() || b.empty()) throw std::invalid_argument("chamfer: empty mesh");
  const PointCloud pa = sample_surface(a, n_points, seed);
  const PointCloud pb = sample_surface(b, n_points, seed);
  return chamfer_l1(pa, pb);
}

double normal_consistency(const TriangleMesh& a, const TriangleMesh& b, std::size_t n_points,
                          std::uint64_t seed) {
  if (a.empty() || b.empty()) throw std::invalid_argument("normal_consistency: empty mesh");
  const PointCloud pa = sample_surface(a, n_points, seed);
  const PointCloud pb = sample_surface(b, n_points, seed);
  const SpatialIndex ia(pa.points);
  const SpatialIndex ib(pb.points);
  double unused = 0.0, cab = 0.0, cba = 0.0;
  directed_stats(pa, ib, pb, true, unused, cab);
  directed_stats(pb, ia, pa, true, unused, cba);
  return 0.5 * cab + 0.5 * cba;
}

nlohmann::json MetricsReport::to_json() const {
  return nlohmann::json{{"iou", iou},
                        {"chamfer_l1", chamfer_l1},
                        {"normal_consistency", normal_consistency},
                        {"n_samples", iou_samples},
                        {"surface_samples", surface_samples},
                        {"seed", seed}};
}

}  // namespace ocfk

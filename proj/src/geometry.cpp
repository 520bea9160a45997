#include "ocfk/geometry.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

#include "ocfk/rng.hpp"

namespace ocfk {

void Aabb::expand(const Vec3& p) {
  min.x = std::min(min.x, p.x);
  min.y = std::min(min.y, p.y);
  min.z = std::min(min.z, p.z);
  max.x = std::max(max.x, p.x);
  max.y = std::max(max.y, p.y);
  max.z = std::max(max.z, p.z);
}

Aabb Aabb::hull(const Aabb& a, const Aabb& b) {
  Aabb h = a;
  h.expand(b.min);
  h.expand(b.max);
  return h;
}

void validate_mesh(const TriangleMesh& mesh) {
  const size_t nv = mesh.vertices.size();
  for (const Vec3& v : mesh.vertices) {
    if (!is_finite(v)) throw std::invalid_argument("mesh has non-finite vertex coordinates");
  }
  for (const Triangle& t : mesh.triangles) {
    for (std::uint32_t idx : t) {
      if (idx >= nv) {
        throw std::invalid_argument("triangle index " + std::to_string(idx) +
                                    " out of range (vertex count " + std::to_string(nv) + ")");
      }
    }
  }
  if (!mesh.normals.empty() && mesh.normals.size() != nv) {
    throw std::invalid_argument("normal count does not match vertex count");
  }
}

size_t drop_degenerate_triangles(TriangleMesh& mesh) {
  const size_t before = mesh.triangles.size();
  std::erase_if(mesh.triangles, [&](const Triangle& t) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    return triangle_area(a, b, c) == 0.0;
  });
  return before - mesh.triangles.size();
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * norm(cross(b - a, c - a));
}

Vec3 triangle_normal(const Vec3& a, const Vec3& b, const Vec3& c) {
  return normalized(cross(b - a, c - a));
}

Aabb mesh_bounds(const TriangleMesh& mesh) {
  if (mesh.vertices.empty()) return {{0, 0, 0}, {0, 0, 0}};
  Aabb box{mesh.vertices[0], mesh.vertices[0]};
  for (const Vec3& v : mesh.vertices) box.expand(v);
  return box;
}

TriangleMesh compute_vertex_normals(const TriangleMesh& mesh, size_t* isolated_count) {
  validate_mesh(mesh);
  TriangleMesh out = mesh;
  out.normals.assign(mesh.vertices.size(), Vec3{0, 0, 0});
  for (const Triangle& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    // cross product magnitude is twice the area, so accumulation is
    // area-weighted without an explicit weight factor
    const Vec3 weighted = cross(b - a, c - a);
    out.normals[t[0]] += weighted;
    out.normals[t[1]] += weighted;
    out.normals[t[2]] += weighted;
  }
  size_t isolated = 0;
  for (Vec3& n : out.normals) {
    const double len = norm(n);
    if (len == 0.0) {
      n = Vec3{0, 0, 1};
      ++isolated;
    } else {
      n = n / len;
    }
  }
  if (isolated_count) *isolated_count = isolated;
  return out;
}

double mesh_volume(const TriangleMesh& mesh) {
  double volume = 0.0;
  for (const Triangle& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    volume += dot(a, cross(b, c)) / 6.0;
  }
  return volume;
}

PointCloud sample_surface(const TriangleMesh& mesh, size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_surface: n must be >= 1");
  if (mesh.triangles.empty()) throw std::invalid_argument("sample_surface: mesh has no triangles");

  std::vector<double> cumulative(mesh.triangles.size());
  double total = 0.0;
  for (size_t i = 0; i < mesh.triangles.size(); ++i) {
    const Triangle& t = mesh.triangles[i];
    total += triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
    cumulative[i] = total;
  }
  if (total <= 0.0) throw std::invalid_argument("sample_surface: mesh has zero total area");

  Rng rng(seed);
  PointCloud cloud;
  cloud.points.reserve(n);
  cloud.normals.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    const double pick = rng.uniform() * total;
    const size_t ti = static_cast<size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
    const Triangle& t = mesh.triangles[std::min(ti, mesh.triangles.size() - 1)];
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    const double r1 = rng.uniform();
    const double r2 = rng.uniform();
    const double sq = std::sqrt(r1);
    const double u = 1.0 - sq;
    const double v = sq * (1.0 - r2);
    const double w = sq * r2;
    cloud.points.push_back(a * u + b * v + c * w);
    cloud.normals.push_back(triangle_normal(a, b, c));
  }
  return cloud;
}

size_t open_edge_count(const TriangleMesh& mesh) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> edges;
  for (const Triangle& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      std::uint32_t a = t[e];
      std::uint32_t b = t[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      ++edges[{a, b}];
    }
  }
  size_t open = 0;
  for (const auto& [edge, count] : edges) {
    if (count != 2) ++open;
  }
  return open;
}

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Ericson, Real-Time Collision Detection, closest point on triangle.
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = dot(ab, ap);
  const double d2 = dot(ac, ap);
  if (d1 <= 0.0 && d2 <= 0.0) return norm(p - a);

  const Vec3 bp = p - b;
  const double d3 = dot(ab, bp);
  const double d4 = dot(ac, bp);
  if (d3 >= 0.0 && d4 <= d3) return norm(p - b);

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return norm(p - (a + ab * v));
  }

  const Vec3 cp = p - c;
  const double d5 = dot(ab, cp);
  const double d6 = dot(ac, cp);
  if (d6 >= 0.0 && d5 <= d6) return norm(p - c);

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return norm(p - (a + ac * w));
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return norm(p - (b + (c - b) * w));
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  return norm(p - (a + ab * v + ac * w));
}

double point_mesh_distance(const Vec3& p, const TriangleMesh& mesh) {
  double best = std::numeric_limits<double>::infinity();
  for (const Triangle& t : mesh.triangles) {
    best = std::min(best, point_triangle_distance(p, mesh.vertices[t[0]], mesh.vertices[t[1]],
                                                  mesh.vertices[t[2]]));
  }
  return best;
}

TriangleMesh flip_orientation(const TriangleMesh& mesh) {
  TriangleMesh out = mesh;
  for (Triangle& t : out.triangles) std::swap(t[1], t[2]);
  return out;
}

}  // namespace ocfk

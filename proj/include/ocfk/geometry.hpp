#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace ocfk {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3() = default;
  Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }

  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm2(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(norm2(v)); }
inline Vec3 normalized(const Vec3& v) { double n = norm(v); return n > 0.0 ? v / n : Vec3{0, 0, 0}; }
inline bool is_finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

struct Aabb {
  Vec3 min, max;

  bool contains(const Vec3& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z &&
           p.z <= max.z;
  }
  Vec3 extent() const { return max - min; }
  void expand(const Vec3& p);
  static Aabb hull(const Aabb& a, const Aabb& b);
};

// All shapes live inside this cube; fields are sampled over it.
inline Aabb world_bounds() { return {{-0.55, -0.55, -0.55}, {0.55, 0.55, 0.55}}; }

using Triangle = std::array<std::uint32_t, 3>;

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::vector<Vec3> normals;  // per-vertex, empty when absent

  bool has_normals() const { return !normals.empty(); }
  bool empty() const { return triangles.empty(); }
};

struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;  // aligned by index, empty when absent

  bool has_normals() const { return !normals.empty(); }
  size_t size() const { return points.size(); }
};

// Throws std::invalid_argument on out-of-range indices or non-finite coordinates.
void validate_mesh(const TriangleMesh& mesh);

// Removes exactly-zero-area triangles in place; returns how many were dropped.
size_t drop_degenerate_triangles(TriangleMesh& mesh);

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);
Vec3 triangle_normal(const Vec3& a, const Vec3& b, const Vec3& c);  // unit, CCW orientation

Aabb mesh_bounds(const TriangleMesh& mesh);

// Area-weighted average of incident triangle normals per vertex. Isolated
// vertices get +z; their count is reported through isolated_count when given.
TriangleMesh compute_vertex_normals(const TriangleMesh& mesh, size_t* isolated_count = nullptr);

// Signed volume by summing tetrahedra against the origin. Positive for
// closed meshes with outward (CCW) orientation.
double mesh_volume(const TriangleMesh& mesh);

// n points drawn area-weighted over triangles, uniform barycentric within
// each; normals come from the owning triangle. Throws on zero total area.
PointCloud sample_surface(const TriangleMesh& mesh, size_t n, std::uint64_t seed);

// Number of edges not shared by exactly two triangles. Zero means watertight.
size_t open_edge_count(const TriangleMesh& mesh);
inline bool is_watertight(const TriangleMesh& mesh) {
  return !mesh.empty() && open_edge_count(mesh) == 0;
}

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

// Minimum distance from p to any triangle of the mesh (linear scan).
double point_mesh_distance(const Vec3& p, const TriangleMesh& mesh);

TriangleMesh flip_orientation(const TriangleMesh& mesh);

}  // namespace ocfk

#pragma once

#include <cstdint>
#include <map>
#include <utility>

#include "ocfk/geometry.hpp"

namespace ocfk::testutil {

// Unit square [0,1]^2 in the z = 0 plane, two triangles, +z orientation.
inline TriangleMesh make_quad_z0() {
  TriangleMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

inline TriangleMesh make_single_triangle() {
  TriangleMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  m.triangles = {{0, 1, 2}};
  return m;
}

// Axis-aligned box with outward orientation (positive volume).
inline TriangleMesh make_box_mesh(const Vec3& center, const Vec3& half) {
  TriangleMesh m;
  for (int i = 0; i < 8; ++i) {
    m.vertices.push_back({center.x + ((i & 1) ? half.x : -half.x),
                          center.y + ((i & 2) ? half.y : -half.y),
                          center.z + ((i & 4) ? half.z : -half.z)});
  }
  // corner bit layout: 1 = +x, 2 = +y, 4 = +z
  m.triangles = {
      {0, 3, 1}, {0, 2, 3},  // z- (0,1,2,3)
      {4, 5, 7}, {4, 7, 6},  // z+
      {0, 1, 5}, {0, 5, 4},  // y-
      {2, 7, 3}, {2, 6, 7},  // y+
      {0, 4, 6}, {0, 6, 2},  // x-
      {1, 3, 7}, {1, 7, 5},  // x+
  };
  return m;
}

// Icosphere by subdividing an icosahedron and projecting onto the sphere.
inline TriangleMesh make_icosphere(double radius, int subdivisions) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  TriangleMesh m;
  m.vertices = {{-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
                {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
                {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1}};
  m.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                 {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                 {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                 {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (Vec3& v : m.vertices) v = normalized(v) * radius;

  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoint;
    auto mid = [&](std::uint32_t a, std::uint32_t b) {
      auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      const Vec3 p = normalized((m.vertices[a] + m.vertices[b]) * 0.5) * radius;
      const std::uint32_t idx = static_cast<std::uint32_t>(m.vertices.size());
      m.vertices.push_back(p);
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<Triangle> next;
    next.reserve(m.triangles.size() * 4);
    for (const Triangle& t : m.triangles) {
      const std::uint32_t ab = mid(t[0], t[1]);
      const std::uint32_t bc = mid(t[1], t[2]);
      const std::uint32_t ca = mid(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({t[1], bc, ab});
      next.push_back({t[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    m.triangles = std::move(next);
  }
  return m;
}

// Same geometry, connectivity destroyed: each triangle gets its own copies
// of its three vertices, triangle order preserved.
inline TriangleMesh to_triangle_soup(const TriangleMesh& mesh) {
  TriangleMesh out;
  out.vertices.reserve(mesh.triangles.size() * 3);
  for (const Triangle& t : mesh.triangles) {
    const std::uint32_t base = static_cast<std::uint32_t>(out.vertices.size());
    out.vertices.push_back(mesh.vertices[t[0]]);
    out.vertices.push_back(mesh.vertices[t[1]]);
    out.vertices.push_back(mesh.vertices[t[2]]);
    out.triangles.push_back({base, base + 1, base + 2});
  }
  return out;
}

inline TriangleMesh rotate_about_z(const TriangleMesh& mesh, double angle) {
  TriangleMesh out = mesh;
  const double c = std::cos(angle), s = std::sin(angle);
  for (Vec3& v : out.vertices) v = {c * v.x - s * v.y, s * v.x + c * v.y, v.z};
  return out;
}

inline TriangleMesh translate_mesh(const TriangleMesh& mesh, const Vec3& d) {
  TriangleMesh out = mesh;
  for (Vec3& v : out.vertices) v += d;
  return out;
}

inline TriangleMesh scale_mesh(const TriangleMesh& mesh, double s) {
  TriangleMesh out = mesh;
  for (Vec3& v : out.vertices) v = v * s;
  return out;
}

}  // namespace ocfk::testutil

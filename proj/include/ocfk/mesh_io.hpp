#pragma once

#include <string>

#include "ocfk/geometry.hpp"

namespace ocfk {

// Meshes: ASCII OBJ (v/vn/f, 1-based indices) and ASCII OFF.
// Point clouds: whitespace XYZ (x y z [nx ny nz] per line) and ASCII PLY.
// Writers are atomic (temp file + rename) and print shortest round-trip
// decimals, so values survive a save/load cycle exactly.

TriangleMesh load_mesh(const std::string& path);  // dispatches on extension
void save_mesh(const std::string& path, const TriangleMesh& mesh);

TriangleMesh load_obj(const std::string& path);
void save_obj(const std::string& path, const TriangleMesh& mesh);

TriangleMesh load_off(const std::string& path);
void save_off(const std::string& path, const TriangleMesh& mesh);

PointCloud load_cloud(const std::string& path);
void save_cloud(const std::string& path, const PointCloud& cloud);

PointCloud load_xyz(const std::string& path);
void save_xyz(const std::string& path, const PointCloud& cloud);

PointCloud load_ply_cloud(const std::string& path);
void save_ply_cloud(const std::string& path, const PointCloud& cloud);

}  // namespace ocfk

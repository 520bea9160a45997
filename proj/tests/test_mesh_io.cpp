#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ocfk/image.hpp"
#include "ocfk/mesh_io.hpp"
#include "ocfk/rng.hpp"
#include "test_util.hpp"

using namespace ocfk;
using namespace ocfk::testutil;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

TriangleMesh random_mesh(std::uint64_t seed, bool with_normals) {
  Rng rng(seed);
  TriangleMesh m = make_icosphere(0.43, 1);
  for (Vec3& v : m.vertices) {
    v.x += rng.uniform(-1e-4, 1e-4);
    v.y += rng.uniform(-1e-4, 1e-4);
    v.z += rng.uniform(-1e-4, 1e-4);
  }
  if (with_normals) m = compute_vertex_normals(m);
  return m;
}

bool same_values(const TriangleMesh& a, const TriangleMesh& b) {
  if (a.vertices.size() != b.vertices.size() || a.triangles != b.triangles) return false;
  for (std::size_t i = 0; i < a.vertices.size(); ++i) {
    if (!(a.vertices[i] == b.vertices[i])) return false;
  }
  if (a.normals.size() != b.normals.size()) return false;
  for (std::size_t i = 0; i < a.normals.size(); ++i) {
    if (!(a.normals[i] == b.normals[i])) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE_BEGIN("mesh_io");

TEST_CASE("obj round trip preserves exact values") {
  const std::string path = temp_path("ocfk_roundtrip.obj");
  const TriangleMesh mesh = random_mesh(1, true);
  save_obj(path, mesh);
  const TriangleMesh loaded = load_mesh(path);
  CHECK(same_values(mesh, loaded));
  std::filesystem::remove(path);
}

TEST_CASE("off round trip preserves exact values") {
  const std::string path = temp_path("ocfk_roundtrip.off");
  const TriangleMesh mesh = random_mesh(2, false);
  save_off(path, mesh);
  const TriangleMesh loaded = load_mesh(path);
  CHECK(same_values(mesh, loaded));
  std::filesystem::remove(path);
}

TEST_CASE("xyz and ply cloud round trips") {
  Rng rng(3);
  PointCloud cloud;
  for (int i = 0; i < 200; ++i) {
    cloud.points.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
    cloud.normals.push_back(normalized({rng.uniform(-1, 1), rng.uniform(-1, 1), 0.5}));
  }
  for (const char* name : {"ocfk_cloud.xyz", "ocfk_cloud.ply"}) {
    const std::string path = temp_path(name);
    save_cloud(path, cloud);
    const PointCloud loaded = load_cloud(path);
    REQUIRE(loaded.size() == cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      CHECK(loaded.points[i] == cloud.points[i]);
      CHECK(loaded.normals[i] == cloud.normals[i]);
    }
    std::filesystem::remove(path);
  }
}

TEST_CASE("obj reader accepts slash face forms and 1-based indices") {
  const std::string path = temp_path("ocfk_forms.obj");
  {
    std::ofstream out(path);
    out << "# comment\n";
    out << "v 0 0 0\nv 1 0 0\nv 0 1 0\n";
    out << "vn 0 0 1\nvn 0 0 1\nvn 0 0 1\n";
    out << "f 1//1 2//2 3//3\n";
  }
  const TriangleMesh mesh = load_obj(path);
  REQUIRE(mesh.vertices.size() == 3);
  REQUIRE(mesh.triangles.size() == 1);
  CHECK(mesh.triangles[0] == Triangle{0, 1, 2});
  CHECK(mesh.has_normals());
  std::filesystem::remove(path);
}

TEST_CASE("obj reader rejects out-of-range indices") {
  const std::string path = temp_path("ocfk_bad.obj");
  {
    std::ofstream out(path);
    out << "v 0 0 0\nv 1 0 0\nf 1 2 3\n";
  }
  CHECK_THROWS(load_obj(path));
  std::filesystem::remove(path);
}

TEST_CASE("xyz reader rejects malformed numbers") {
  const std::string path = temp_path("ocfk_bad.xyz");
  {
    std::ofstream out(path);
    out << "0.1 0.2 zebra\n";
  }
  CHECK_THROWS(load_xyz(path));
  std::filesystem::remove(path);
}

TEST_CASE("pgm round trip") {
  BinaryImage img = make_image(32, 32);
  Rng rng(4);
  for (auto& p : img.pixels) p = rng.uniform() < 0.3 ? 1 : 0;
  const std::string path = temp_path("ocfk_test.pgm");
  save_pgm(path, img);
  const BinaryImage loaded = load_pgm(path);
  CHECK(loaded.width == 32);
  CHECK(loaded.height == 32);
  CHECK(loaded.pixels == img.pixels);
  std::filesystem::remove(path);
}

TEST_CASE("atomic writes leave no temp files behind") {
  const std::string path = temp_path("ocfk_atomic.obj");
  save_obj(path, make_single_triangle());
  CHECK(std::filesystem::exists(path));
  // no stray .tmp files in the directory
  for (const auto& entry : std::filesystem::directory_iterator(
           std::filesystem::temp_directory_path())) {
    const std::string name = entry.path().filename().string();
    CHECK(name.find("ocfk_atomic.obj.tmp") == std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST_SUITE_END();

#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "ocfk/extract.hpp"
#include "ocfk/kdtree.hpp"
#include "ocfk/metrics.hpp"
#include "ocfk/shapes.hpp"
#include "test_util.hpp"

using namespace ocfk;
using namespace ocfk::testutil;

namespace {

TriangleMesh sphere_mesh(double radius, std::size_t cells = 64) {
  ShapeSpec spec = canonical_shape(ShapeKind::kSphere);
  spec.radius = radius;
  const auto field = make_field(spec, 200.0);
  return marching_cubes(evaluate_grid(*field, cells + 1), 0.5);
}

}  // namespace

TEST_SUITE_BEGIN("metrics");

TEST_CASE("iou: identity is exactly 1, disjoint shapes are 0") {
  const auto sphere = make_field(canonical_shape(ShapeKind::kSphere));
  const FieldSolid solid(*sphere);
  CHECK(volumetric_iou(solid, solid, 20000, 1) == 1.0);

  ShapeSpec a = canonical_shape(ShapeKind::kSphere);
  a.radius = 0.15;
  a.translation = {-0.3, 0, 0};
  ShapeSpec b = a;
  b.translation = {0.3, 0, 0};
  const auto fa = make_field(a);
  const auto fb = make_field(b);
  CHECK(volumetric_iou(FieldSolid(*fa), FieldSolid(*fb), 20000, 2) == 0.0);
}

TEST_CASE("iou: unit cubes offset by half overlap by a third") {
  const TriangleMesh cube_a = make_box_mesh({0, 0, 0}, {0.5, 0.5, 0.5});
  const TriangleMesh cube_b = make_box_mesh({0.5, 0, 0}, {0.5, 0.5, 0.5});
  const double iou = volumetric_iou(cube_a, cube_b, 100000, 3);
  CHECK(iou == doctest::Approx(1.0 / 3.0).epsilon(0.03));  // +-0.01 absolute
  CHECK(std::abs(iou - 1.0 / 3.0) <= 0.01);
}

TEST_CASE("iou: non-watertight mesh operand reports its open edge count") {
  const TriangleMesh open = make_single_triangle();
  try {
    MeshSolid solid(open);
    FAIL("expected a watertightness error");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("3 open edges") != std::string::npos);
  }
}

TEST_CASE("iou: both-empty convention is 1.0") {
  ShapeSpec tiny = canonical_shape(ShapeKind::kSphere);
  tiny.radius = 0.0;  // degenerate: no interior at sampled points
  const auto fa = make_field(tiny);
  const auto fb = make_field(tiny);
  CHECK(volumetric_iou(FieldSolid(*fa), FieldSolid(*fb), 5000, 4) == 1.0);
}

TEST_CASE("iou is invariant under a rigid transform of both shapes") {
  const TriangleMesh a = make_box_mesh({0.05, 0, 0}, {0.3, 0.2, 0.2});
  const TriangleMesh b = sphere_mesh(0.3, 32);
  const double base = volumetric_iou(a, b, 100000, 5);

  const double angle = 0.7;
  const Vec3 shift{0.07, -0.04, 0.09};
  const TriangleMesh a2 = translate_mesh(rotate_about_z(a, angle), shift);
  const TriangleMesh b2 = translate_mesh(rotate_about_z(b, angle), shift);
  const double moved = volumetric_iou(a2, b2, 100000, 5);
  CHECK(std::abs(base - moved) <= 0.01);
}

TEST_CASE("chamfer: identity under matched seeds is exactly zero") {
  const TriangleMesh mesh = sphere_mesh(0.4, 32);
  CHECK(chamfer_l1(mesh, mesh, 2000, 7) == 0.0);
}

TEST_CASE("chamfer: two single-point clouds at distance d") {
  PointCloud a, b;
  a.points = {{0, 0, 0}};
  b.points = {{0, 0, 0.37}};
  CHECK(chamfer_l1(a, b) == doctest::Approx(0.37));
  CHECK(chamfer_l1(b, a) == doctest::Approx(0.37));
}

TEST_CASE("chamfer: concentric spheres read the radial gap") {
  const TriangleMesh inner = make_icosphere(0.4, 3);
  const TriangleMesh outer = make_icosphere(0.5, 3);
  const double cd = chamfer_l1(inner, outer, 10000, 8);
  CHECK(std::abs(cd - 0.1) <= 0.005);
}

TEST_CASE("chamfer scales exactly with the geometry (power-of-two scale)") {
  const TriangleMesh mesh_a = sphere_mesh(0.35, 32);
  const TriangleMesh mesh_b = make_box_mesh({0, 0, 0}, {0.25, 0.3, 0.2});
  const double base = chamfer_l1(mesh_a, mesh_b, 3000, 9);
  const double doubled = chamfer_l1(scale_mesh(mesh_a, 2.0), scale_mesh(mesh_b, 2.0), 3000, 9);
  CHECK(doubled == 2.0 * base);
}

TEST_CASE("chamfer is symmetric under matched seeds") {
  const TriangleMesh mesh_a = sphere_mesh(0.35, 32);
  const TriangleMesh mesh_b = make_box_mesh({0.05, -0.03, 0}, {0.25, 0.3, 0.2});
  CHECK(chamfer_l1(mesh_a, mesh_b, 4000, 10) == chamfer_l1(mesh_b, mesh_a, 4000, 10));
}

TEST_CASE("normal consistency: identity and parallel planes give 1") {
  const TriangleMesh mesh = sphere_mesh(0.4, 32);
  CHECK(normal_consistency(mesh, mesh, 4000, 11) >= 1.0 - 1e-9);

  const TriangleMesh plane_a = make_quad_z0();
  TriangleMesh plane_b = make_quad_z0();
  for (Vec3& v : plane_b.vertices) v.z += 1e-4;
  CHECK(normal_consistency(plane_a, plane_b, 2000, 12) == doctest::Approx(1.0));
}

TEST_CASE("normal consistency: rotated cube against a brute-force oracle") {
  const TriangleMesh cube = make_box_mesh({0, 0, 0}, {0.3, 0.3, 0.3});
  const TriangleMesh rotated = rotate_about_z(cube, 3.14159265358979323846 / 4.0);

  const std::size_t n = 10000;
  const std::uint64_t seed = 13;
  const double nc = normal_consistency(cube, rotated, n, seed);

  // independent oracle: same samplings, exhaustive nearest-neighbor scan
  const PointCloud pa = sample_surface(cube, n, seed);
  const PointCloud pb = sample_surface(rotated, n, seed);
  auto directed = [](const PointCloud& from, const PointCloud& to) {
    double acc = 0.0;
    for (std::size_t i = 0; i < from.size(); ++i) {
      double best = 1e300;
      std::size_t best_j = 0;
      for (std::size_t j = 0; j < to.size(); ++j) {
        const double d = norm2(from.points[i] - to.points[j]);
        if (d < best) {
          best = d;
          best_j = j;
        }
      }
      acc += std::abs(dot(from.normals[i], to.normals[best_j]));
    }
    return acc / static_cast<double>(from.size());
  };
  const double oracle = 0.5 * directed(pa, pb) + 0.5 * directed(pb, pa);
  CHECK(std::abs(nc - oracle) <= 0.01);
  // the rotated faces meet at 45 degrees except for the parallel tops
  CHECK(nc > 0.5);
  CHECK(nc < 1.0);
}

TEST_CASE("metrics report serializes the documented fields") {
  MetricsReport report;
  report.iou = 0.5;
  report.chamfer_l1 = 0.01;
  report.normal_consistency = 0.9;
  report.iou_samples = 1000;
  report.surface_samples = 200;
  report.seed = 42;
  const nlohmann::json j = report.to_json();
  CHECK(j.at("iou") == 0.5);
  CHECK(j.at("chamfer_l1") == 0.01);
  CHECK(j.at("normal_consistency") == 0.9);
  CHECK(j.at("n_samples") == 1000);
  CHECK(j.at("seed") == 42);
}

TEST_SUITE_END();

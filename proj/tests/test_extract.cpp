#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "ocfk/extract.hpp"
#include "ocfk/rng.hpp"
#include "ocfk/shapes.hpp"

using namespace ocfk;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSphereVolume = 4.0 / 3.0 * kPi * 0.4 * 0.4 * 0.4;  // ~0.26808

bool same_mesh(const TriangleMesh& a, const TriangleMesh& b, double tol) {
  if (a.vertices.size() != b.vertices.size() || a.triangles != b.triangles) return false;
  for (std::size_t i = 0; i < a.vertices.size(); ++i) {
    if (norm(a.vertices[i] - b.vertices[i]) > tol) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE_BEGIN("extract");

TEST_CASE("evaluate_grid: constant field fills every lattice point") {
  const ConstantField field(0.7);
  const OccupancyGrid grid = evaluate_grid(field, 4);
  CHECK(grid.values.size() == 64);
  for (double v : grid.values) CHECK(v == 0.7);
}

TEST_CASE("evaluate_grid: occupied fraction of a sphere matches the volume ratio") {
  const auto field = make_field(canonical_shape(ShapeKind::kSphere));
  const OccupancyGrid grid = evaluate_grid(*field, 64);
  std::size_t occupied = 0;
  for (double v : grid.values) occupied += (v > 0.5);
  const double fraction = static_cast<double>(occupied) / static_cast<double>(grid.values.size());
  CHECK(fraction == doctest::Approx(kSphereVolume / 1.331).epsilon(0.02));
}

TEST_CASE("evaluate_grid: deterministic") {
  const auto field = make_field(canonical_shape(ShapeKind::kTorus), 200.0);
  const OccupancyGrid a = evaluate_grid(*field, 33);
  const OccupancyGrid b = evaluate_grid(*field, 33);
  CHECK(a.values == b.values);
}

TEST_CASE("marching cubes: sphere fidelity at 64 cells") {
  const auto field = make_field(canonical_shape(ShapeKind::kSphere), 200.0);
  const OccupancyGrid grid = evaluate_grid(*field, 65);
  const McResult result = marching_cubes_detailed(grid, 0.5);
  const TriangleMesh& mesh = result.mesh;

  REQUIRE(!mesh.empty());
  CHECK(open_edge_count(mesh) == 0);
  CHECK(mesh_volume(mesh) == doctest::Approx(kSphereVolume).epsilon(0.02));

  // every vertex within half a cell of the analytic radius
  const double half_cell = 0.5 * 1.1 / 64.0;
  for (const Vec3& v : mesh.vertices) {
    CHECK(std::abs(norm(v) - 0.4) < half_cell);
  }

  // interpolation invariant: corner values blend to tau at the vertex
  for (const McVertexEdge& e : result.vertex_edges) {
    CHECK(std::abs(e.v0 + e.t * (e.v1 - e.v0) - 0.5) <= 1e-12);
  }
}

TEST_CASE("marching cubes: all-below threshold gives an empty mesh") {
  const ConstantField field(0.2);
  const OccupancyGrid grid = evaluate_grid(field, 17);
  CHECK(marching_cubes(grid, 0.5).empty());
  // exactly at tau counts as outside (strict crossing rule)
  const ConstantField at_tau(0.5);
  CHECK(marching_cubes(evaluate_grid(at_tau, 17), 0.5).empty());
}

TEST_CASE("marching cubes: box field is watertight with sphere topology") {
  const auto field = make_field(canonical_shape(ShapeKind::kBox));
  const OccupancyGrid grid = evaluate_grid(*field, 33);
  const TriangleMesh mesh = marching_cubes(grid, 0.5);
  REQUIRE(!mesh.empty());

  // edge census: every edge shared by exactly two triangles
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> census;
  for (const Triangle& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      auto key = std::minmax(t[e], t[(e + 1) % 3]);
      ++census[key];
    }
  }
  for (const auto& [edge, count] : census) CHECK(count == 2);

  // Euler characteristic of a genus-0 surface
  const std::ptrdiff_t v = static_cast<std::ptrdiff_t>(mesh.vertices.size());
  const std::ptrdiff_t e = static_cast<std::ptrdiff_t>(census.size());
  const std::ptrdiff_t f = static_cast<std::ptrdiff_t>(mesh.triangles.size());
  CHECK(v - e + f == 2);
}

TEST_CASE("marching cubes: torus Euler characteristic is zero") {
  const auto field = make_field(canonical_shape(ShapeKind::kTorus), 200.0);
  const TriangleMesh mesh = marching_cubes(evaluate_grid(*field, 65), 0.5);
  std::set<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (const Triangle& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) edges.insert(std::minmax(t[e], t[(e + 1) % 3]));
  }
  const std::ptrdiff_t chi = static_cast<std::ptrdiff_t>(mesh.vertices.size()) -
                             static_cast<std::ptrdiff_t>(edges.size()) +
                             static_cast<std::ptrdiff_t>(mesh.triangles.size());
  CHECK(chi == 0);
  CHECK(open_edge_count(mesh) == 0);
}

TEST_CASE("threshold monotonicity: raising tau never grows the occupied set") {
  Rng rng(77);
  OccupancyGrid grid;
  grid.points_per_axis = 9;
  grid.bounds = world_bounds();
  grid.values.resize(9 * 9 * 9);
  for (double& v : grid.values) v = rng.uniform();
  for (int trial = 0; trial < 20; ++trial) {
    double t1 = rng.uniform(0.05, 0.9);
    double t2 = rng.uniform(t1, 0.95);
    std::size_t occ1 = 0, occ2 = 0;
    for (double v : grid.values) {
      occ1 += (v > t1);
      occ2 += (v > t2);
    }
    CHECK(occ2 <= occ1);
  }
}

TEST_CASE("mise equals dense extraction for sphere, box and torus") {
  for (ShapeKind kind : {ShapeKind::kSphere, ShapeKind::kBox, ShapeKind::kTorus}) {
    CAPTURE(to_string(kind));
    const auto field = make_field(canonical_shape(kind), 200.0);

    MiseConfig cfg;
    cfg.initial_cells = 32;
    cfg.steps = 2;
    cfg.tau = 0.5;

    const CountingField counting_mise(*field);
    const OccupancyGrid refined = mise_extract(counting_mise, cfg);
    const std::uint64_t mise_evals = counting_mise.count();

    const CountingField counting_dense(*field);
    const OccupancyGrid dense = evaluate_grid(counting_dense, 129);
    const std::uint64_t dense_evals = counting_dense.count();

    const TriangleMesh from_mise = marching_cubes(refined, 0.5);
    const TriangleMesh from_dense = marching_cubes(dense, 0.5);
    CHECK(same_mesh(from_mise, from_dense, 1e-9));
    CHECK(!from_mise.empty());
    CHECK(mise_evals < dense_evals);
    // the octree should skip the bulk of the lattice
    CHECK(static_cast<double>(mise_evals) < 0.3 * static_cast<double>(dense_evals));
  }
}

TEST_CASE("mise: constant-zero field yields no active cells and an empty mesh") {
  const ConstantField field(0.0);
  MiseConfig cfg;
  cfg.initial_cells = 8;
  cfg.steps = 1;
  const CountingField counting(field);
  const OccupancyGrid grid = mise_extract(counting, cfg);
  // only the coarse lattice is ever evaluated
  CHECK(counting.count() == 9 * 9 * 9);
  CHECK(marching_cubes(grid, 0.5).empty());
}

TEST_CASE("mise validates its configuration") {
  const ConstantField field(0.0);
  MiseConfig bad;
  bad.initial_cells = 12;  // not a power of two
  CHECK_THROWS_AS(mise_extract(field, bad), std::invalid_argument);
  bad.initial_cells = 2;  // too small
  CHECK_THROWS_AS(mise_extract(field, bad), std::invalid_argument);
  MiseConfig bad_tau;
  bad_tau.tau = 1.5;
  CHECK_THROWS_AS(mise_extract(field, bad_tau), std::invalid_argument);
}

TEST_CASE("mise with zero steps equals a dense grid at the initial resolution") {
  const auto field = make_field(canonical_shape(ShapeKind::kSphere), 200.0);
  MiseConfig cfg;
  cfg.initial_cells = 16;
  cfg.steps = 0;
  const OccupancyGrid a = mise_extract(*field, cfg);
  const OccupancyGrid b = evaluate_grid(*field, 17);
  CHECK(a.values == b.values);
}

TEST_SUITE_END();

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "ocfk/dataset.hpp"

using namespace ocfk;

namespace {

std::string temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  return dir.string();
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace

TEST_SUITE_BEGIN("dataset");

TEST_CASE("analytic membership: sphere, box boundary, union semantics") {
  const ShapeSpec sphere = canonical_shape(ShapeKind::kSphere);
  CHECK(sphere.occupancy({0, 0, 0}) == 1.0);
  CHECK(sphere.occupancy({0.5, 0, 0}) == 0.0);
  CHECK(sphere.occupancy({0.4, 0, 0}) == 1.0);  // boundary is inside

  ShapeSpec box;
  box.kind = ShapeKind::kBox;
  box.half_extents = {0.3, 0.3, 0.3};
  CHECK(box.occupancy({0.3 + 1e-6, 0, 0}) == 0.0);
  CHECK(box.occupancy({0.3 - 1e-6, 0, 0}) == 1.0);

  ShapeSpec uni;
  uni.kind = ShapeKind::kUnionOfTwo;
  uni.radius_a = 0.1;
  uni.radius_b = 0.12;
  uni.center_a = {-0.25, 0, 0};
  uni.center_b = {0.25, 0, 0};
  const auto fa = [&](const Vec3& p) {
    ShapeSpec a;
    a.radius = uni.radius_a;
    a.translation = uni.center_a;
    ShapeSpec b;
    b.radius = uni.radius_b;
    b.translation = uni.center_b;
    return std::max(a.occupancy(p), b.occupancy(p));
  };
  Rng rng(1);
  for (int i = 0; i < 500; ++i) {
    const Vec3 p{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    CHECK(uni.occupancy(p) == fa(p));
  }
}

TEST_CASE("pose and scale compose: rotated box membership") {
  ShapeSpec box;
  box.kind = ShapeKind::kBox;
  box.half_extents = {0.4, 0.1, 0.1};
  box.rotation_z = kPi / 2.0;  // long axis now along y
  box.scale = 0.5;
  CHECK(box.occupancy({0, 0.19, 0}) == 1.0);
  CHECK(box.occupancy({0.19, 0, 0}) == 0.0);
  CHECK(box.occupancy({0.04, 0.0, 0.04}) == 1.0);
}

TEST_CASE("make_field rejects out-of-bounds specs") {
  ShapeSpec big = canonical_shape(ShapeKind::kSphere);
  big.radius = 0.6;
  CHECK_THROWS_AS(make_field(big), std::invalid_argument);
  ShapeSpec shifted = canonical_shape(ShapeKind::kSphere);
  shifted.translation = {0.3, 0, 0};
  CHECK_THROWS_AS(make_field(shifted), std::invalid_argument);
}

TEST_CASE("sample_queries: positive fraction tracks the volume ratio") {
  Tensor2 points, labels;
  sample_queries(canonical_shape(ShapeKind::kSphere), 4096, 17, points, labels);
  REQUIRE(points.rows == 4096);
  double positive = 0.0;
  for (double v : labels.data) positive += v;
  const double expected = (4.0 / 3.0 * kPi * 0.064) / 1.331;
  CHECK(positive / 4096.0 == doctest::Approx(expected).epsilon(0.15));
  CHECK(std::abs(positive / 4096.0 - expected) < 0.03);

  // labels match re-evaluation of the field exactly
  const auto field = make_field(canonical_shape(ShapeKind::kSphere));
  for (std::size_t i = 0; i < 256; ++i) {
    const Vec3 p{points(i, 0), points(i, 1), points(i, 2)};
    CHECK(field->evaluate_one(p) == labels(i, 0));
  }
}

TEST_CASE("sample_queries: degenerate shape gives all-zero labels") {
  ShapeSpec empty = canonical_shape(ShapeKind::kSphere);
  empty.radius = 0.0;
  Tensor2 points, labels;
  sample_queries(empty, 512, 3, points, labels);
  for (double v : labels.data) CHECK(v == 0.0);
}

TEST_CASE("sample_queries is deterministic per seed") {
  Tensor2 p1, l1, p2, l2, p3, l3;
  sample_queries(canonical_shape(ShapeKind::kTorus), 128, 5, p1, l1);
  sample_queries(canonical_shape(ShapeKind::kTorus), 128, 5, p2, l2);
  sample_queries(canonical_shape(ShapeKind::kTorus), 128, 6, p3, l3);
  CHECK(p1.data == p2.data);
  CHECK(l1.data == l2.data);
  CHECK(p1.data != p3.data);
}

TEST_CASE("silhouette: sphere disc pixel count matches the analytic area") {
  const BinaryImage img = render_silhouette(canonical_shape(ShapeKind::kSphere), ViewAxis::kZ, 32);
  const double radius_px = 0.4 / 1.1 * 32.0;
  const double expected = kPi * radius_px * radius_px;  // ~425
  CHECK(std::abs(static_cast<double>(img.lit_count()) - expected) <= 25.0);
}

TEST_CASE("silhouette: empty shape renders black, box renders a filled rectangle") {
  ShapeSpec empty = canonical_shape(ShapeKind::kSphere);
  empty.radius = 0.0;
  CHECK(render_silhouette(empty, ViewAxis::kX, 32).lit_count() == 0);

  ShapeSpec box;
  box.kind = ShapeKind::kBox;
  box.half_extents = {0.35, 0.25, 0.15};
  const BinaryImage img = render_silhouette(box, ViewAxis::kZ, 32);
  // lit region is a contiguous axis-aligned rectangle
  int min_x = 32, max_x = -1, min_y = 32, max_y = -1;
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) {
      if (img.at(x, y)) {
        min_x = std::min(min_x, x);
        max_x = std::max(max_x, x);
        min_y = std::min(min_y, y);
        max_y = std::max(max_y, y);
      }
    }
  }
  REQUIRE(max_x >= 0);
  const std::size_t rect = static_cast<std::size_t>(max_x - min_x + 1) * (max_y - min_y + 1);
  CHECK(img.lit_count() == rect);
}

TEST_CASE("silhouette rendering is consistent with occupancy") {
  const ShapeSpec spec = canonical_shape(ShapeKind::kTorus);
  const BinaryImage img = render_silhouette(spec, ViewAxis::kX, 32);
  for (int py = 0; py < 32; ++py) {
    for (int px = 0; px < 32; ++px) {
      if (!img.at(px, py)) continue;
      const double u = -0.55 + (px + 0.5) * 1.1 / 32.0;
      const double v = -0.55 + (py + 0.5) * 1.1 / 32.0;
      bool any_inside = false;
      for (int d = 0; d < 64 && !any_inside; ++d) {
        const double w = -0.55 + (d + 0.5) * 1.1 / 64.0;
        any_inside = spec.occupancy({w, u, v}) > 0.5;
      }
      CHECK(any_inside);
    }
  }
}

TEST_CASE("augment: determinism, scale statistics, bounds") {
  const ShapeSpec base = canonical_shape(ShapeKind::kSphere);
  const ShapeSpec a = augment(base, 7);
  const ShapeSpec b = augment(base, 7);
  CHECK(a.scale == b.scale);
  CHECK(a.translation == b.translation);

  double mean_scale = 0.0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const ShapeSpec s = augment(base, seed);
    CHECK(s.scale >= 0.75);
    CHECK(s.scale <= 1.0);
    CHECK(s.fits_in_unit_box());
    mean_scale += s.scale;
  }
  mean_scale /= 10000.0;
  CHECK(std::abs(mean_scale - 0.875) <= 0.01);
}

TEST_CASE("ocqd query files round trip bit exactly") {
  Tensor2 points, labels;
  sample_queries(canonical_shape(ShapeKind::kBox), 256, 9, points, labels);
  const std::string path =
      (std::filesystem::temp_directory_path() / "ocfk_queries.ocqd").string();
  save_queries(path, points, labels);
  Tensor2 p2, l2;
  load_queries(path, p2, l2);
  CHECK(p2.data == points.data);
  CHECK(l2.data == labels.data);
  std::filesystem::remove(path);
}

TEST_CASE("generate + load dataset: files, split, exact labels") {
  const std::string dir = temp_dir("ocfk_dataset_test");
  DatasetConfig cfg;
  cfg.count = 25;
  cfg.queries = 64;
  cfg.seed = 123;
  cfg.cloud_points = 60;
  generate_dataset(dir, cfg);

  CHECK(std::filesystem::exists(dir + "/manifest.json"));
  CHECK(std::filesystem::exists(dir + "/sample_00000.pgm"));
  CHECK(std::filesystem::exists(dir + "/sample_00000.xyz"));
  CHECK(std::filesystem::exists(dir + "/sample_00000.ocqd"));

  const std::vector<TrainingSample> samples = load_dataset(dir);
  REQUIRE(samples.size() == 25);
  std::size_t train = 0;
  for (const TrainingSample& s : samples) {
    train += s.in_train_split;
    CHECK(s.queries.rows == 64);
    CHECK(s.cloud.size() == 60);
    CHECK(s.silhouette.width == 32);
    // labels are the exact analytic occupancy of the manifest spec
    for (std::size_t i = 0; i < s.queries.rows; ++i) {
      const Vec3 p{s.queries(i, 0), s.queries(i, 1), s.queries(i, 2)};
      CHECK(s.spec.occupancy(p) == s.labels(i, 0));
    }
  }
  CHECK(train == 20);  // 80/20 split per kind
  std::filesystem::remove_all(dir);
}

TEST_CASE("shape spec JSON round trip") {
  Rng rng(31);
  for (ShapeKind kind : {ShapeKind::kSphere, ShapeKind::kBox, ShapeKind::kTorus,
                         ShapeKind::kCylinder, ShapeKind::kUnionOfTwo}) {
    const ShapeSpec spec = random_shape(kind, rng);
    const ShapeSpec back = ShapeSpec::from_json(spec.to_json());
    Rng probe(7);
    for (int i = 0; i < 200; ++i) {
      const Vec3 p{probe.uniform(-0.55, 0.55), probe.uniform(-0.55, 0.55),
                   probe.uniform(-0.55, 0.55)};
      CHECK(spec.sdf(p) == back.sdf(p));
    }
  }
}

TEST_CASE("ground-truth meshes are watertight for all overfit shapes") {
  for (const ShapeSpec& spec : overfit_shapes()) {
    const TriangleMesh mesh = ground_truth_mesh(spec, 64);
    CHECK(!mesh.empty());
    CHECK(open_edge_count(mesh) == 0);
  }
}

TEST_SUITE_END();

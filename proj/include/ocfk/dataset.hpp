#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ocfk/geometry.hpp"
#include "ocfk/image.hpp"
#include "ocfk/rng.hpp"
#include "ocfk/shapes.hpp"
#include "ocfk/tensor.hpp"

namespace ocfk {

// Supervision for one shape: a silhouette and/or a 300-point cloud plus
// labelled occupancy queries.
struct TrainingSample {
  ShapeSpec spec;
  BinaryImage silhouette;   // may be empty for cloud-only datasets
  PointCloud cloud;         // may be empty for image-only datasets
  Tensor2 queries;          // Q x 3
  Tensor2 labels;           // Q x 1, exact analytic occupancy
  bool in_train_split = true;
};

// Q uniform points over the world cube with exact indicator labels.
void sample_queries(const ShapeSpec& spec, std::size_t q, std::uint64_t seed, Tensor2& points,
                    Tensor2& labels);

enum class ViewAxis { kX = 0, kY = 1, kZ = 2 };
ViewAxis view_axis_from_string(const std::string& name);

// Orthographic silhouette: a pixel is lit when any of 64 depth samples along
// its view ray lies inside the shape.
BinaryImage render_silhouette(const ShapeSpec& spec, ViewAxis view, int res = 32);

// Scale by u ~ U(0.75, 1) and jitter the translation; clamps keep the result
// inside bounds and are counted in clamp_count when provided.
ShapeSpec augment(const ShapeSpec& spec, std::uint64_t seed, std::size_t* clamp_count = nullptr);

// Ground-truth mesh for a spec: smoothed field, MISE refinement, marching
// cubes. cells is the final effective resolution.
TriangleMesh ground_truth_mesh(const ShapeSpec& spec, std::size_t cells = 128);

// ---------------------------------------------------------------------------
// On-disk dataset (one silhouette PGM, one cloud XYZ and one OCQD query file
// per sample, plus a JSON manifest with specs and the train/val split).

struct DatasetConfig {
  std::vector<ShapeKind> kinds{ShapeKind::kSphere, ShapeKind::kBox, ShapeKind::kTorus,
                               ShapeKind::kCylinder, ShapeKind::kUnionOfTwo};
  std::size_t count = 25;
  std::size_t queries = 1024;
  std::uint64_t seed = 0;
  ViewAxis view = ViewAxis::kX;
  bool augment = true;
  std::size_t cloud_points = 300;
  double train_fraction = 0.8;
};

void generate_dataset(const std::string& dir, const DatasetConfig& cfg);
std::vector<TrainingSample> load_dataset(const std::string& dir);

// Queries + labels: magic "OCQD", count, Q x 3 points, Q labels (LE f64).
void save_queries(const std::string& path, const Tensor2& points, const Tensor2& labels);
void load_queries(const std::string& path, Tensor2& points, Tensor2& labels);

// Random shape of the given kind with parameters in sane desk-scale ranges.
ShapeSpec random_shape(ShapeKind kind, Rng& rng);

// The five fixed shapes used for overfit runs: one of each kind.
std::vector<ShapeSpec> overfit_shapes();

}  // namespace ocfk

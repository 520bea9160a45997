#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <json.hpp>

#include "ocfk/field.hpp"
#include "ocfk/geometry.hpp"

namespace ocfk {

// Inside/outside query over a solid: either an occupancy field thresholded
// at 0.5 or a watertight mesh via +x ray parity.
class Solid {
 public:
  virtual ~Solid() = default;
  virtual Aabb bounds() const = 0;
  virtual bool inside(const Vec3& p) const = 0;
};

class FieldSolid : public Solid {
 public:
  explicit FieldSolid(const OccupancyField& field) : field_(field) {}
  Aabb bounds() const override { return field_.bounds(); }
  bool inside(const Vec3& p) const override { return field_.evaluate_one(p) > 0.5; }

 private:
  const OccupancyField& field_;
};

// Throws on construction when the mesh is not watertight, naming the open
// edge count. Parity rays run along +x through a 2D (y, z) triangle grid.
class MeshSolid : public Solid {
 public:
  explicit MeshSolid(const TriangleMesh& mesh);
  Aabb bounds() const override { return bounds_; }
  bool inside(const Vec3& p) const override;

 private:
  const TriangleMesh& mesh_;
  Aabb bounds_;
  int grid_res_ = 0;
  std::vector<std::vector<std::uint32_t>> cells_;  // (y, z) bins
};

// Monte-Carlo |A ∩ B| / |A ∪ B| over the hull of both bounds. Both counts
// zero yields 1.0 (two empty solids are identical).
double volumetric_iou(const Solid& a, const Solid& b, std::size_t n_samples, std::uint64_t seed);
double volumetric_iou(const TriangleMesh& a, const TriangleMesh& b, std::size_t n_samples,
                      std::uint64_t seed);

// Symmetric mean Euclidean nearest-neighbor distance between surface
// samplings of n points each (both drawn with the same seed).
double chamfer_l1(const TriangleMesh& a, const TriangleMesh& b, std::size_t n_points,
                  std::uint64_t seed);
double chamfer_l1(const PointCloud& a, const PointCloud& b);

// Symmetric mean |cos| between normals at nearest-neighbor correspondences.
double normal_consistency(const TriangleMesh& a, const TriangleMesh& b, std::size_t n_points,
                          std::uint64_t seed);

struct MetricsReport {
  double iou = 0.0;
  double chamfer_l1 = 0.0;
  double normal_consistency = 0.0;
  std::size_t iou_samples = 0;
  std::size_t surface_samples = 0;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

}  // namespace ocfk

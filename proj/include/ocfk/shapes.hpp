#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include <json.hpp>

#include "ocfk/field.hpp"
#include "ocfk/geometry.hpp"

namespace ocfk {

enum class ShapeKind { kSphere, kBox, kTorus, kCylinder, kUnionOfTwo };

std::string to_string(ShapeKind kind);
ShapeKind shape_kind_from_string(const std::string& name);

// Analytic solid with a pose (rotation about z, translation) and a scale.
// The posed, scaled shape must fit strictly inside [-0.5, 0.5]^3.
struct ShapeSpec {
  ShapeKind kind = ShapeKind::kSphere;

  // kind-specific parameters
  double radius = 0.4;                   // sphere
  Vec3 half_extents{0.3, 0.3, 0.3};      // box
  double major_radius = 0.3;             // torus
  double minor_radius = 0.12;            // torus
  double cyl_radius = 0.25;              // cylinder
  double cyl_half_height = 0.3;          // cylinder
  double radius_a = 0.2, radius_b = 0.2; // union of two spheres
  Vec3 center_a{0, 0, 0}, center_b{0, 0, 0};

  double rotation_z = 0.0;  // radians
  Vec3 translation{0, 0, 0};
  double scale = 1.0;

  // Signed distance in world coordinates; negative inside.
  double sdf(const Vec3& p) const;
  // Exact indicator: 1 when sdf <= 0, else 0.
  double occupancy(const Vec3& p) const { return sdf(p) <= 0.0 ? 1.0 : 0.0; }

  // Radius of a ball around the local origin that contains the unscaled shape.
  double circumradius() const;
  bool fits_in_unit_box() const;

  nlohmann::json to_json() const;
  static ShapeSpec from_json(const nlohmann::json& j);
};

// Canonical specs used by CLI shortcuts and tests.
ShapeSpec canonical_shape(ShapeKind kind);
ShapeSpec canonical_shape(const std::string& name);

// Exact indicator field, or a logistic-smoothed version when smooth_k > 0:
// p = sigmoid(smooth_k * (-sdf)).
std::unique_ptr<OccupancyField> make_field(const ShapeSpec& spec, double smooth_k = 0.0);

}  // namespace ocfk

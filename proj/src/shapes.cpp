#include "ocfk/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ocfk/nn.hpp"

namespace ocfk {

std::string to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::kSphere: return "sphere";
    case ShapeKind::kBox: return "box";
    case ShapeKind::kTorus: return "torus";
    case ShapeKind::kCylinder: return "cylinder";
    case ShapeKind::kUnionOfTwo: return "union";
  }
  return "sphere";
}

ShapeKind shape_kind_from_string(const std::string& name) {
  if (name == "sphere") return ShapeKind::kSphere;
  if (name == "box") return ShapeKind::kBox;
  if (name == "torus") return ShapeKind::kTorus;
  if (name == "cylinder") return ShapeKind::kCylinder;
  if (name == "union" || name == "union-of-two") return ShapeKind::kUnionOfTwo;
  throw std::invalid_argument("unknown shape kind: " + name);
}

namespace {

double sdf_sphere(const Vec3& p, double r) { return norm(p) - r; }

double sdf_box(const Vec3& p, const Vec3& h) {
  const Vec3 q{std::abs(p.x) - h.x, std::abs(p.y) - h.y, std::abs(p.z) - h.z};
  const Vec3 outside{std::max(q.x, 0.0), std::max(q.y, 0.0), std::max(q.z, 0.0)};
  const double inside = std::min(std::max(q.x, std::max(q.y, q.z)), 0.0);
  return norm(outside) + inside;
}

double sdf_torus(const Vec3& p, double major, double minor) {
  const double ring = std::sqrt(p.x * p.x + p.y * p.y) - major;
  return std::sqrt(ring * ring + p.z * p.z) - minor;
}

double sdf_cylinder(const Vec3& p, double r, double hh) {
  const double dr = std::sqrt(p.x * p.x + p.y * p.y) - r;
  const double dz = std::abs(p.z) - hh;
  const double outside = std::sqrt(std::max(dr, 0.0) * std::max(dr, 0.0) +
                                   std::max(dz, 0.0) * std::max(dz, 0.0));
  return outside + std::min(std::max(dr, dz), 0.0);
}

}  // namespace

double ShapeSpec::sdf(const Vec3& p) const {
  // world -> local: undo translation, rotation, then scale
  const Vec3 q = p - translation;
  const double c = std::cos(rotation_z), s = std::sin(rotation_z);
  const Vec3 local{(c * q.x + s * q.y) / scale, (-s * q.x + c * q.y) / scale, q.z / scale};
  double d = 0.0;
  switch (kind) {
    case ShapeKind::kSphere: d = sdf_sphere(local, radius); break;
    case ShapeKind::kBox: d = sdf_box(local, half_extents); break;
    case ShapeKind::kTorus: d = sdf_torus(local, major_radius, minor_radius); break;
    case ShapeKind::kCylinder: d = sdf_cylinder(local, cyl_radius, cyl_half_height); break;
    case ShapeKind::kUnionOfTwo:
      d = std::min(sdf_sphere(local - center_a, radius_a), sdf_sphere(local - center_b, radius_b));
      break;
  }
  return d * scale;
}

double ShapeSpec::circumradius() const {
  switch (kind) {
    case ShapeKind::kSphere: return radius;
    case ShapeKind::kBox: return norm(half_extents);
    case ShapeKind::kTorus: return std::sqrt(major_radius * major_radius +
                                             minor_radius * minor_radius) + minor_radius;
    case ShapeKind::kCylinder:
      return std::sqrt(cyl_radius * cyl_radius + cyl_half_height * cyl_half_height);
    case ShapeKind::kUnionOfTwo:
      return std::max(norm(center_a) + radius_a, norm(center_b) + radius_b);
  }
  return 0.0;
}

bool ShapeSpec::fits_in_unit_box() const {
  const double reach = scale * circumradius();
  const double margin = 0.5;
  return std::abs(translation.x) + reach < margin && std::abs(translation.y) + reach < margin &&
         std::abs(translation.z) + reach < margin;
}

nlohmann::json ShapeSpec::to_json() const {
  nlohmann::json j;
  j["kind"] = to_string(kind);
  switch (kind) {
    case ShapeKind::kSphere: j["radius"] = radius; break;
    case ShapeKind::kBox: j["half_extents"] = {half_extents.x, half_extents.y, half_extents.z}; break;
    case ShapeKind::kTorus:
      j["major_radius"] = major_radius;
      j["minor_radius"] = minor_radius;
      break;
    case ShapeKind::kCylinder:
      j["cyl_radius"] = cyl_radius;
      j["cyl_half_height"] = cyl_half_height;
      break;
    case ShapeKind::kUnionOfTwo:
      j["radius_a"] = radius_a;
      j["radius_b"] = radius_b;
      j["center_a"] = {center_a.x, center_a.y, center_a.z};
      j["center_b"] = {center_b.x, center_b.y, center_b.z};
      break;
  }
  j["rotation_z"] = rotation_z;
  j["translation"] = {translation.x, translation.y, translation.z};
  j["scale"] = scale;
  return j;
}

ShapeSpec ShapeSpec::from_json(const nlohmann::json& j) {
  ShapeSpec s;
  s.kind = shape_kind_from_string(j.at("kind").get<std::string>());
  auto vec3 = [](const nlohmann::json& a) { return Vec3{a.at(0), a.at(1), a.at(2)}; };
  switch (s.kind) {
    case ShapeKind::kSphere: s.radius = j.at("radius"); break;
    case ShapeKind::kBox: s.half_extents = vec3(j.at("half_extents")); break;
    case ShapeKind::kTorus:
      s.major_radius = j.at("major_radius");
      s.minor_radius = j.at("minor_radius");
      break;
    case ShapeKind::kCylinder:
      s.cyl_radius = j.at("cyl_radius");
      s.cyl_half_height = j.at("cyl_half_height");
      break;
    case ShapeKind::kUnionOfTwo:
      s.radius_a = j.at("radius_a");
      s.radius_b = j.at("radius_b");
      s.center_a = vec3(j.at("center_a"));
      s.center_b = vec3(j.at("center_b"));
      break;
  }
  s.rotation_z = j.value("rotation_z", 0.0);
  if (j.contains("translation")) s.translation = vec3(j.at("translation"));
  s.scale = j.value("scale", 1.0);
  return s;
}

ShapeSpec canonical_shape(ShapeKind kind) {
  ShapeSpec s;
  s.kind = kind;
  switch (kind) {
    case ShapeKind::kSphere:
      s.radius = 0.4;
      break;
    case ShapeKind::kBox:
      s.half_extents = {0.3, 0.2, 0.15};
      break;
    case ShapeKind::kTorus:
      s.major_radius = 0.3;
      s.minor_radius = 0.12;
      break;
    case ShapeKind::kCylinder:
      s.cyl_radius = 0.18;
      s.cyl_half_height = 0.32;
      break;
    case ShapeKind::kUnionOfTwo:
      s.radius_a = 0.22;
      s.radius_b = 0.17;
      s.center_a = {0.0, -0.13, -0.08};
      s.center_b = {0.0, 0.13, 0.1};
      break;
  }
  return s;
}

ShapeSpec canonical_shape(const std::string& name) {
  return canonical_shape(shape_kind_from_string(name));
}

namespace {

class ShapeField : public OccupancyField {
 public:
  ShapeField(const ShapeSpec& spec, double smooth_k) : spec_(spec), smooth_k_(smooth_k) {}

  void evaluate(std::span<const Vec3> points, std::span<double> out) const override {
    if (smooth_k_ > 0.0) {
      for (std::size_t i = 0; i < points.size(); ++i) {
        out[i] = sigmoid_scalar(smooth_k_ * -spec_.sdf(points[i]));
      }
    } else {
      for (std::size_t i = 0; i < points.size(); ++i) out[i] = spec_.occupancy(points[i]);
    }
  }

 private:
  ShapeSpec spec_;
  double smooth_k_;
};

}  // namespace

std::unique_ptr<OccupancyField> make_field(const ShapeSpec& spec, double smooth_k) {
  if (!spec.fits_in_unit_box()) {
    throw std::invalid_argument("shape does not fit strictly inside [-0.5, 0.5]^3");
  }
  return std::make_unique<ShapeField>(spec, smooth_k);
}

}  // namespace ocfk

#include "ocfk/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "ocfk/convert.hpp"
#include "ocfk/extract.hpp"
#include "ocfk/io_util.hpp"
#include "ocfk/mesh_io.hpp"
#include "ocfk/rng.hpp"

namespace ocfk {

namespace {
constexpr double kSmoothK = 200.0;
constexpr int kDepthSamples = 64;
}  // namespace

void sample_queries(const ShapeSpec& spec, std::size_t q, std::uint64_t seed, Tensor2& points,
                    Tensor2& labels) {
  if (q < 2) throw std::invalid_argument("sample_queries: need at least 2 points");
  const Aabb box = world_bounds();
  Rng rng(seed);
  points = Tensor2(q, 3);
  labels = Tensor2(q, 1);
  for (std::size_t i = 0; i < q; ++i) {
    const Vec3 p{rng.uniform(box.min.x, box.max.x), rng.uniform(box.min.y, box.max.y),
                 rng.uniform(box.min.z, box.max.z)};
    points(i, 0) = p.x;
    points(i, 1) = p.y;
    points(i, 2) = p.z;
    labels(i, 0) = spec.occupancy(p);
  }
}

ViewAxis view_axis_from_string(const std::string& name) {
  if (name == "x") return ViewAxis::kX;
  if (name == "y") return ViewAxis::kY;
  if (name == "z") return ViewAxis::kZ;
  throw std::invalid_argument("view axis must be x, y or z");
}

BinaryImage render_silhouette(const ShapeSpec& spec, ViewAxis view, int res) {
  if (res < 8) throw std::invalid_argument("render_silhouette: resolution must be >= 8");
  const Aabb box = world_bounds();
  const int axis = static_cast<int>(view);
  const int u_axis = (axis + 1) % 3;
  const int v_axis = (axis + 2) % 3;

  const double span = box.max.x - box.min.x;  // cube, same on every axis
  const double pixel = span / res;
  const double depth_step = span / kDepthSamples;

  BinaryImage img = make_image(res, res);
  for (int py = 0; py < res; ++py) {
    for (int px = 0; px < res; ++px) {
      const double u = box.min.x + (px + 0.5) * pixel;
      const double v = box.min.x + (py + 0.5) * pixel;
      bool hit = false;
      for (int d = 0; d < kDepthSamples && !hit; ++d) {
        const double w = box.min.x + (d + 0.5) * depth_step;
        double coords[3];
        coords[axis] = w;
        coords[u_axis] = u;
        coords[v_axis] = v;
        hit = spec.occupancy({coords[0], coords[1], coords[2]}) > 0.5;
      }
      img.at(px, py) = hit ? 1 : 0;
    }
  }
  return img;
}

ShapeSpec augment(const ShapeSpec& spec, std::uint64_t seed, std::size_t* clamp_count) {
  Rng rng(seed);
  ShapeSpec out = spec;
  std::size_t clamps = 0;

  const double factor = rng.uniform(0.75, 1.0);
  out.scale = spec.scale * factor;
  if (out.scale < 0.75) {
    out.scale = 0.75;
    ++clamps;
  }

  // translation jitter, the random-crop analogue
  const double reach = out.scale * out.circumradius();
  const double margin = std::max(0.0, 0.5 - reach - 1e-9);
  for (int a = 0; a < 3; ++a) {
    const double jitter = rng.uniform(-0.05, 0.05);
    double t = (a == 0 ? spec.translation.x : a == 1 ? spec.translation.y : spec.translation.z);
    t += jitter;
    if (t > margin) {
      t = margin;
      ++clamps;
    } else if (t < -margin) {
      t = -margin;
      ++clamps;
    }
    (a == 0 ? out.translation.x : a == 1 ? out.translation.y : out.translation.z) = t;
  }
  if (clamp_count) *clamp_count += clamps;
  if (!out.fits_in_unit_box()) {
    throw std::logic_error("augment produced an out-of-bounds shape");
  }
  return out;
}

TriangleMesh ground_truth_mesh(const ShapeSpec& spec, std::size_t cells) {
  const auto field = make_field(spec, kSmoothK);
  MiseConfig cfg;
  cfg.initial_cells = std::min<std::size_t>(32, cells);
  cfg.steps = 0;
  while ((cfg.initial_cells << cfg.steps) < cells) ++cfg.steps;
  cfg.tau = 0.5;
  return extract_mesh(*field, cfg);
}

// ---------------------------------------------------------------------------
// OCQD query files

void save_queries(const std::string& path, const Tensor2& points, const Tensor2& labels) {
  if (points.rows != labels.rows || points.cols != 3 || labels.cols != 1) {
    throw std::invalid_argument("save_queries: expected Q x 3 points and Q x 1 labels");
  }
  AtomicFileWriter writer(path, true);
  std::ostream& os = writer.stream();
  os.write("OCQD", 4);
  write_u64(os, points.rows);
  write_f64_array(os, points.data.data(), points.size());
  write_f64_array(os, labels.data.data(), labels.size());
  writer.commit();
}

void load_queries(const std::string& path, Tensor2& points, Tensor2& labels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open query file: " + path);
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "OCQD") {
    throw std::runtime_error(path + ": not an OCQD query file");
  }
  const std::uint64_t q = read_u64(in);
  points = Tensor2(q, 3);
  labels = Tensor2(q, 1);
  read_f64_array(in, points.data.data(), points.size());
  read_f64_array(in, labels.data.data(), labels.size());
}

// ---------------------------------------------------------------------------
// Dataset generation / loading

ShapeSpec random_shape(ShapeKind kind, Rng& rng) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    ShapeSpec s;
    s.kind = kind;
    switch (kind) {
      case ShapeKind::kSphere:
        s.radius = rng.uniform(0.25, 0.45);
        break;
      case ShapeKind::kBox:
        s.half_extents = {rng.uniform(0.15, 0.4), rng.uniform(0.15, 0.4),
                          rng.uniform(0.15, 0.4)};
        break;
      case ShapeKind::kTorus:
        s.major_radius = rng.uniform(0.2, 0.32);
        s.minor_radius = rng.uniform(0.08, std::min(0.15, 0.55 * s.major_radius));
        break;
      case ShapeKind::kCylinder:
        s.cyl_radius = rng.uniform(0.15, 0.3);
        s.cyl_half_height = rng.uniform(0.15, 0.38);
        break;
      case ShapeKind::kUnionOfTwo: {
        s.radius_a = rng.uniform(0.16, 0.26);
        s.radius_b = rng.uniform(0.12, 0.22);
        const double gap = rng.uniform(0.5, 0.9) * (s.radius_a + s.radius_b);
        const double angle = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
        s.center_a = {0.0, -0.5 * gap * std::cos(angle), -0.5 * gap * std::sin(angle)};
        s.center_b = {0.0, 0.5 * gap * std::cos(angle), 0.5 * gap * std::sin(angle)};
        break;
      }
    }
    s.rotation_z = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    if (s.fits_in_unit_box()) return s;
  }
  throw std::logic_error("random_shape failed to produce an in-bounds spec");
}

std::vector<ShapeSpec> overfit_shapes() {
  return {canonical_shape(ShapeKind::kSphere), canonical_shape(ShapeKind::kBox),
          canonical_shape(ShapeKind::kTorus), canonical_shape(ShapeKind::kCylinder),
          canonical_shape(ShapeKind::kUnionOfTwo)};
}

void generate_dataset(const std::string& dir, const DatasetConfig& cfg) {
  if (cfg.kinds.empty() || cfg.count == 0) {
    throw std::invalid_argument("generate_dataset: empty kind list or zero count");
  }
  std::filesystem::create_directories(dir);

  nlohmann::json manifest;
  manifest["format"] = "ocfk-dataset";
  manifest["seed"] = cfg.seed;
  manifest["queries"] = cfg.queries;
  manifest["view"] = std::string(1, "xyz"[static_cast<int>(cfg.view)]);
  nlohmann::json samples = nlohmann::json::array();

  // deterministic per-kind split: the last ceil((1-f)*count_k) of each kind
  // go to validation
  std::vector<std::size_t> kind_total(cfg.kinds.size(), 0);
  for (std::size_t i = 0; i < cfg.count; ++i) ++kind_total[i % cfg.kinds.size()];
  std::vector<std::size_t> kind_seen(cfg.kinds.size(), 0);

  for (std::size_t i = 0; i < cfg.count; ++i) {
    const std::size_t kind_idx = i % cfg.kinds.size();
    Rng rng = Rng::fork(cfg.seed, 1000 + i);
    ShapeSpec spec = random_shape(cfg.kinds[kind_idx], rng);
    if (cfg.augment) spec = augment(spec, Rng::fork(cfg.seed, 2000 + i).next_u64());

    char name[32];
    std::snprintf(name, sizeof(name), "sample_%05zu", i);
    const std::string base = dir + "/" + name;

    const BinaryImage silhouette = render_silhouette(spec, cfg.view, 32);
    save_pgm(base + ".pgm", silhouette);

    const TriangleMesh gt = ground_truth_mesh(spec, 64);
    const PointCloud cloud =
        mesh_to_pointcloud(gt, cfg.cloud_points, Rng::fork(cfg.seed, 3000 + i).next_u64());
    save_xyz(base + ".xyz", cloud);

    Tensor2 points, labels;
    sample_queries(spec, cfg.queries, Rng::fork(cfg.seed, 4000 + i).next_u64(), points, labels);
    save_queries(base + ".ocqd", points, labels);

    const std::size_t seen = kind_seen[kind_idx]++;
    const bool train =
        seen < static_cast<std::size_t>(std::ceil(cfg.train_fraction *
                                                  static_cast<double>(kind_total[kind_idx])));

    nlohmann::json entry;
    entry["name"] = name;
    entry["spec"] = spec.to_json();
    entry["split"] = train ? "train" : "val";
    samples.push_back(entry);
  }
  manifest["samples"] = samples;

  AtomicFileWriter writer(dir + "/manifest.json", false);
  writer.stream() << manifest.dump(2) << '\n';
  writer.commit();
}

std::vector<TrainingSample> load_dataset(const std::string& dir) {
  const nlohmann::json manifest = nlohmann::json::parse(read_text_file(dir + "/manifest.json"));
  std::vector<TrainingSample> out;
  for (const nlohmann::json& entry : manifest.at("samples")) {
    TrainingSample sample;
    const std::string base = dir + "/" + entry.at("name").get<std::string>();
    sample.spec = ShapeSpec::from_json(entry.at("spec"));
    sample.silhouette = load_pgm(base + ".pgm");
    sample.cloud = load_xyz(base + ".xyz");
    load_queries(base + ".ocqd", sample.queries, sample.labels);
    sample.in_train_split = entry.at("split").get<std::string>() == "train";
    out.push_back(std::move(sample));
  }
  if (out.empty()) throw std::runtime_error(dir + ": dataset is empty");
  return out;
}

}  // namespace ocfk

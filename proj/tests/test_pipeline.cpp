#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ocfk/convert.hpp"
#include "ocfk/pipeline.hpp"
#include "test_util.hpp"

using namespace ocfk;
using namespace ocfk::testutil;

namespace {

// Desk-size fixtures: 8x8 silhouettes, thin decoder, 20-point clouds.
const ImageEncoderConfig kTinyImage{8, {2, 4}, 16};
const DecoderConfig kTinyDecoder{24, 2, 16};
const PointNetConfig kTinyPointNet{{8, 16, 24}, 16, 20};

std::vector<TrainingSample> tiny_samples(bool with_clouds) {
  std::vector<TrainingSample> samples;
  for (const ShapeSpec& spec :
       {canonical_shape(ShapeKind::kSphere), canonical_shape(ShapeKind::kBox)}) {
    TrainingSample s;
    s.spec = spec;
    s.silhouette = render_silhouette(spec, ViewAxis::kX, 8);
    sample_queries(spec, 128, 11, s.queries, s.labels);
    if (with_clouds) {
      s.cloud = mesh_to_pointcloud(ground_truth_mesh(spec, 32), 20, 13);
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

TrainConfig tiny_config(std::size_t steps) {
  TrainConfig cfg;
  cfg.batch_size = 2;
  cfg.points_per_sample = 16;
  cfg.lr = 1e-3;
  cfg.max_steps = steps;
  cfg.eval_every = 5;
  cfg.eval_points = 64;
  cfg.patience = 100;
  cfg.seed = 3;
  return cfg;
}

bool same_checkpoint(const Checkpoint& a, const Checkpoint& b) {
  if (a.tensors.size() != b.tensors.size()) return false;
  for (std::size_t i = 0; i < a.tensors.size(); ++i) {
    if (a.tensors[i].first != b.tensors[i].first) return false;
    if (a.tensors[i].second.data != b.tensors[i].second.data) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE_BEGIN("pipeline");

TEST_CASE("zero training steps returns the initialization") {
  Stage1Model model(kTinyImage, kTinyDecoder, 21);
  const Checkpoint init = snapshot(model, nullptr);
  TrainConfig cfg = tiny_config(0);
  const TrainResult result = train_stage1(model, tiny_samples(false), cfg);
  CHECK(result.steps_run == 0);
  for (const auto& [name, tensor] : init.tensors) {
    const Tensor2* after = result.best.find(name);
    if (name.rfind("__adam__", 0) == 0) continue;
    REQUIRE(after != nullptr);
    CHECK(after->data == tensor.data);
  }
}

TEST_CASE("loss strictly decreases over the first 10 steps on a frozen minibatch") {
  Stage1Model model(kTinyImage, kTinyDecoder, 22);
  const std::vector<TrainingSample> samples = tiny_samples(false);

  AdamState adam;
  adam.lr = 1e-3;
  adam.init_like(model.params);
  model.params.zero_grads();

  // frozen batch: both samples, fixed 32-point slice
  std::vector<std::size_t> rows(32);
  std::iota(rows.begin(), rows.end(), 0);
  auto slice = [&](const Tensor2& t) {
    Tensor2 out(rows.size(), t.cols);
    for (std::size_t i = 0; i < rows.size(); ++i) std::copy_n(t.row(rows[i]), t.cols, out.row(i));
    return out;
  };

  double previous = std::numeric_limits<double>::infinity();
  for (int step = 0; step < 10; ++step) {
    double loss = 0.0;
    for (const TrainingSample& s : samples) {
      ImageEncoderCache ecache;
      DecoderCache dcache;
      const Tensor2 latent = model.encoder.forward(model.params, s.silhouette, &ecache);
      const Tensor2 points = slice(s.queries);
      const Tensor2 labels = slice(s.labels);
      const Tensor2 probs =
          model.decoder.forward(model.params, points, latent, Mode::kTrain, &dcache);
      BceResult bce = bce_loss(probs, labels);
      loss += bce.loss / 2.0;
      for (double& g : bce.dp.data) g /= 2.0;
      const Tensor2 d_latent = model.decoder.backward(model.params, dcache, bce.dp);
      model.encoder.backward(model.params, ecache, d_latent);
    }
    CHECK(loss < previous);
    previous = loss;
    adam_step(model.params, adam);
  }
}

TEST_CASE("training is bitwise deterministic under a fixed seed") {
  auto run = [](int which) {
    if (which == 1) {
      Stage1Model model(kTinyImage, kTinyDecoder, 23);
      return train_stage1(model, tiny_samples(false), tiny_config(20)).best;
    }
    Stage2Model model(kTinyPointNet, kTinyDecoder, 23);
    return train_stage2(model, tiny_samples(true), tiny_config(20)).best;
  };
  CHECK(same_checkpoint(run(1), run(1)));
  CHECK(same_checkpoint(run(2), run(2)));
}

TEST_CASE("run log emits one JSON object per evaluation") {
  Stage1Model model(kTinyImage, kTinyDecoder, 24);
  std::ostringstream log;
  TrainConfig cfg = tiny_config(10);
  cfg.eval_every = 5;
  train_stage1(model, tiny_samples(false), cfg, &log);

  std::istringstream lines(log.str());
  std::string line;
  int entries = 0;
  while (std::getline(lines, line)) {
    const nlohmann::json j = nlohmann::json::parse(line);
    CHECK(j.contains("step"));
    CHECK(j.contains("train_loss"));
    CHECK(j.contains("val_loss"));
    CHECK(j.contains("val_acc"));
    ++entries;
  }
  CHECK(entries == 2);
}

TEST_CASE("stage-2 training rejects clouds of the wrong size") {
  Stage2Model model(kTinyPointNet, kTinyDecoder, 25);
  std::vector<TrainingSample> samples = tiny_samples(true);
  samples[0].cloud.points.pop_back();
  CHECK_THROWS_AS(train_stage2(model, samples, tiny_config(5)), std::invalid_argument);
}

TEST_CASE("untrained stage 1 yields an empty mesh with a warning") {
  Stage1Model model(kTinyImage, kTinyDecoder, 26);
  const BinaryImage silhouette = render_silhouette(canonical_shape(ShapeKind::kSphere),
                                                   ViewAxis::kX, 8);
  MiseConfig mise;
  mise.initial_cells = 16;
  mise.steps = 1;
  const OccnetResult result = reconstruct_occnet(silhouette, model, mise);
  CHECK(result.mesh.empty());
  CHECK(result.empty_warning);

  Stage2Model stage2(kTinyPointNet, kTinyDecoder, 27);
  PipelineConfig cfg;
  cfg.mise = mise;
  cfg.cloud_points = 20;
  CHECK_THROWS_WITH(reconstruct_doccnet(silhouette, model, stage2, cfg),
                    "stage-1 produced no surface");
}

TEST_CASE("decoder field matches direct decoder evaluation and counts batches") {
  Stage1Model model(kTinyImage, kTinyDecoder, 28);
  Rng rng(1);
  for (std::size_t i = 0; i < model.params.count(); ++i) {
    for (double& v : model.params.value(i).data) v = rng.uniform(-0.4, 0.4);
  }
  const Tensor2 latent(1, 16, 0.3);
  const DecoderField field(model.decoder, model.params, latent);

  std::vector<Vec3> pts;
  for (int i = 0; i < 100; ++i) {
    pts.push_back({rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)});
  }
  std::vector<double> out(pts.size());
  field.evaluate(pts, out);

  Tensor2 batch(pts.size(), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    batch(i, 0) = pts[i].x;
    batch(i, 1) = pts[i].y;
    batch(i, 2) = pts[i].z;
  }
  const Tensor2 direct = model.decoder.forward(model.params, batch, latent, Mode::kEval, nullptr);
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(out[i] == direct.data[i]);
}

TEST_CASE("conversion discards connectivity: triangle soup gives the same cloud") {
  const TriangleMesh mesh = ground_truth_mesh(canonical_shape(ShapeKind::kTorus), 32);
  const TriangleMesh soup = to_triangle_soup(mesh);
  const PointCloud a = mesh_to_pointcloud(mesh, 150, 31);
  const PointCloud b = mesh_to_pointcloud(soup, 150, 31);
  CHECK(a.points == b.points);
}

TEST_CASE("evaluate_run: self comparison scores near perfect, translation hurts") {
  const ShapeSpec spec = canonical_shape(ShapeKind::kSphere);
  const TriangleMesh pred = ground_truth_mesh(spec, 128);
  const MetricsReport self = evaluate_run(pred, spec, 50000, 4000, 41);
  CHECK(self.iou >= 0.99);
  CHECK(self.chamfer_l1 <= 1e-3);
  CHECK(self.normal_consistency >= 0.99);

  const MetricsReport shifted = evaluate_run(translate_mesh(pred, {0.1, 0, 0}), spec, 50000,
                                             4000, 41);
  CHECK(shifted.iou < self.iou);
  CHECK(shifted.chamfer_l1 > self.chamfer_l1);
  CHECK(shifted.normal_consistency < self.normal_consistency);
}

TEST_SUITE_END();

#include "ocfk/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "ocfk/convert.hpp"

namespace ocfk {

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("train: batch size must be >= 1");
  if (points_per_sample < 2) {
    throw std::invalid_argument("train: need at least 2 query points per sample");
  }
  if (eval_every < 1) throw std::invalid_argument("train: eval_every must be >= 1");
  if (!(lr > 0.0)) throw std::invalid_argument("train: learning rate must be positive");
}

namespace {

Tensor2 tensor_rows(const Tensor2& src, const std::vector<std::size_t>& rows) {
  Tensor2 out(rows.size(), src.cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy_n(src.row(rows[i]), src.cols, out.row(i));
  }
  return out;
}

// Shared training loop. Encode returns the latent for a sample; EncodeBack
// propagates the latent gradient into the encoder.
template <class Model, class Encode, class EncodeBack, class Snapshot>
TrainResult train_loop(Model& model, const std::vector<TrainingSample>& samples,
                       const TrainConfig& cfg, std::ostream* log, Encode encode,
                       EncodeBack encode_back, Snapshot snapshot_fn,
                       const std::function<EvalStats(std::size_t)>& evaluate) {
  cfg.validate();
  if (samples.empty()) throw std::invalid_argument("train: dataset is empty");

  std::vector<std::size_t> train_ids, val_ids;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    (samples[i].in_train_split ? train_ids : val_ids).push_back(i);
  }
  if (train_ids.empty()) throw std::invalid_argument("train: no samples in the train split");

  AdamState adam;
  adam.lr = cfg.lr;
  adam.beta1 = cfg.beta1;
  adam.beta2 = cfg.beta2;
  adam.init_like(model.params);
  model.params.zero_grads();

  TrainResult result;
  result.best = snapshot_fn(adam);
  result.best_val_loss = std::numeric_limits<double>::infinity();

  Rng batch_rng = Rng::fork(cfg.seed, 11);
  Rng point_rng = Rng::fork(cfg.seed, 12);

  // epoch-shuffled sample order
  std::vector<std::size_t> order = train_ids;
  std::size_t cursor = order.size();  // trigger shuffle on first use
  auto next_sample = [&]() {
    if (cursor >= order.size()) {
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[batch_rng.uniform_index(i)]);
      }
      cursor = 0;
    }
    return order[cursor++];
  };

  std::size_t evals_since_best = 0;
  const double inv_batch = 1.0 / static_cast<double>(cfg.batch_size);

  for (std::size_t step = 1; step <= cfg.max_steps; ++step) {
    double step_loss = 0.0;
    for (std::size_t bs = 0; bs < cfg.batch_size; ++bs) {
      const TrainingSample& sample = samples[next_sample()];
      const std::size_t q = sample.queries.rows;
      std::vector<std::size_t> pick(cfg.points_per_sample);
      for (std::size_t& idx : pick) idx = point_rng.uniform_index(q);
      const Tensor2 points = tensor_rows(sample.queries, pick);
      const Tensor2 labels = tensor_rows(sample.labels, pick);

      auto [latent, enc_token] = encode(sample);
      DecoderCache cache;
      const Tensor2 probs = model.decoder.forward(model.params, points, latent, Mode::kTrain,
                                                  &cache);
      BceResult bce = bce_loss(probs, labels);
      step_loss += bce.loss * inv_batch;
      for (double& g : bce.dp.data) g *= inv_batch;
      const Tensor2 d_latent = model.decoder.backward(model.params, cache, bce.dp);
      encode_back(enc_token, d_latent);
    }
    if (!std::isfinite(step_loss)) {
      throw std::runtime_error("training diverged: loss is not finite at step " +
                               std::to_string(step));
    }
    adam_step(model.params, adam);

    if (step % cfg.eval_every == 0 || step == cfg.max_steps) {
      const EvalStats val = evaluate(cfg.eval_points);
      if (log) {
        nlohmann::json line{{"step", step},
                            {"train_loss", step_loss},
                            {"val_loss", val.loss},
                            {"val_acc", val.accuracy}};
        (*log) << line.dump() << '\n';
      }
      if (val.loss < result.best_val_loss) {
        result.best_val_loss = val.loss;
        result.best = snapshot_fn(adam);
        evals_since_best = 0;
      } else {
        ++evals_since_best;
      }
      result.steps_run = step;
      if (val.accuracy >= cfg.target_accuracy) break;
      if (evals_since_best >= cfg.patience) break;
    }
    result.steps_run = step;
  }
  if (!std::isfinite(result.best_val_loss)) {
    // no evaluation ever ran (max_steps < eval_every); keep the final state
    result.best = snapshot_fn(adam);
  }
  return result;
}

template <class Model, class Encode>
EvalStats evaluate_samples(Model& model, const std::vector<TrainingSample>& samples,
                           const std::vector<std::size_t>& ids, std::size_t points,
                           Encode encode) {
  double loss_sum = 0.0;
  std::size_t correct = 0, total = 0;
  for (std::size_t id : ids) {
    const TrainingSample& sample = samples[id];
    Tensor2 points_t, labels_t;
    if (points == 0 || points >= sample.queries.rows) {
      points_t = sample.queries;
      labels_t = sample.labels;
    } else {
      // deterministic leading slice; evaluation must not consume rng state
      std::vector<std::size_t> pick(points);
      std::iota(pick.begin(), pick.end(), 0);
      points_t = tensor_rows(sample.queries, pick);
      labels_t = tensor_rows(sample.labels, pick);
    }
    const Tensor2 latent = encode(sample);
    const Tensor2 probs =
        model.decoder.forward(model.params, points_t, latent, Mode::kEval, nullptr);
    loss_sum += bce_loss(probs, labels_t).loss;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      correct += ((probs.data[i] > 0.5) == (labels_t.data[i] > 0.5));
    }
    total += probs.size();
  }
  EvalStats stats;
  stats.loss = loss_sum / static_cast<double>(ids.size());
  stats.accuracy = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  return stats;
}

std::vector<std::size_t> eval_ids(const std::vector<TrainingSample>& samples) {
  std::vector<std::size_t> val;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!samples[i].in_train_split) val.push_back(i);
  }
  if (val.empty()) {
    val.resize(samples.size());
    std::iota(val.begin(), val.end(), 0);
  }
  return val;
}

}  // namespace

TrainResult train_stage1(Stage1Model& model, const std::vector<TrainingSample>& samples,
                         const TrainConfig& cfg, std::ostream* log) {
  for (const TrainingSample& s : samples) {
    if (s.silhouette.pixels.empty()) {
      throw std::invalid_argument("train stage 1: sample lacks a silhouette");
    }
  }
  const std::vector<std::size_t> val = eval_ids(samples);
  struct Token {
    ImageEncoderCache cache;
  };
  auto encode = [&](const TrainingSample& s) {
    Token token;
    Tensor2 latent = model.encoder.forward(model.params, s.silhouette, &token.cache);
    return std::pair<Tensor2, Token>(std::move(latent), std::move(token));
  };
  auto encode_back = [&](const Token& token, const Tensor2& d_latent) {
    model.encoder.backward(model.params, token.cache, d_latent);
  };
  auto snapshot_fn = [&](const AdamState& adam) { return snapshot(model, &adam); };
  auto evaluate = [&](std::size_t pts) {
    return evaluate_samples(model, samples, val, pts, [&](const TrainingSample& s) {
      return model.encoder.forward(model.params, s.silhouette, nullptr);
    });
  };
  return train_loop(model, samples, cfg, log, encode, encode_back, snapshot_fn, evaluate);
}

TrainResult train_stage2(Stage2Model& model, const std::vector<TrainingSample>& samples,
                         const TrainConfig& cfg, std::ostream* log) {
  for (const TrainingSample& s : samples) {
    if (s.cloud.size() != model.encoder_cfg.n_points) {
      throw std::invalid_argument("train stage 2: sample cloud must have " +
                                  std::to_string(model.encoder_cfg.n_points) + " points");
    }
  }
  const std::vector<std::size_t> val = eval_ids(samples);
  struct Token {
    PointNetCache cache;
  };
  auto encode = [&](const TrainingSample& s) {
    Token token;
    Tensor2 latent = model.encoder.forward(model.params, cloud_to_tensor(s.cloud), &token.cache);
    return std::pair<Tensor2, Token>(std::move(latent), std::move(token));
  };
  auto encode_back = [&](const Token& token, const Tensor2& d_latent) {
    model.encoder.backward(model.params, token.cache, d_latent);
  };
  auto snapshot_fn = [&](const AdamState& adam) { return snapshot(model, &adam); };
  auto evaluate = [&](std::size_t pts) {
    return evaluate_samples(model, samples, val, pts, [&](const TrainingSample& s) {
      return model.encoder.forward(model.params, cloud_to_tensor(s.cloud), nullptr);
    });
  };
  return train_loop(model, samples, cfg, log, encode, encode_back, snapshot_fn, evaluate);
}

EvalStats evaluate_model(Stage1Model& model, const std::vector<TrainingSample>& samples,
                         std::size_t points) {
  std::vector<std::size_t> ids(samples.size());
  std::iota(ids.begin(), ids.end(), 0);
  return evaluate_samples(model, samples, ids, points, [&](const TrainingSample& s) {
    return model.encoder.forward(model.params, s.silhouette, nullptr);
  });
}

EvalStats evaluate_model(Stage2Model& model, const std::vector<TrainingSample>& samples,
                         std::size_t points) {
  std::vector<std::size_t> ids(samples.size());
  std::iota(ids.begin(), ids.end(), 0);
  return evaluate_samples(model, samples, ids, points, [&](const TrainingSample& s) {
    return model.encoder.forward(model.params, cloud_to_tensor(s.cloud), nullptr);
  });
}

// ---------------------------------------------------------------------------
// Reconstruction

Tensor2 cloud_to_tensor(const PointCloud& cloud) {
  Tensor2 t(cloud.size(), 3);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    t(i, 0) = cloud.points[i].x;
    t(i, 1) = cloud.points[i].y;
    t(i, 2) = cloud.points[i].z;
  }
  return t;
}

DecoderField::DecoderField(OccupancyDecoder& decoder, const ParamSet& params, Tensor2 latent)
    : decoder_(&decoder), params_(&params), latent_(std::move(latent)) {}

void DecoderField::evaluate(std::span<const Vec3> points, std::span<double> out) const {
  constexpr std::size_t kChunk = 8192;
  for (std::size_t start = 0; start < points.size(); start += kChunk) {
    const std::size_t n = std::min(kChunk, points.size() - start);
    Tensor2 batch(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
      batch(i, 0) = points[start + i].x;
      batch(i, 1) = points[start + i].y;
      batch(i, 2) = points[start + i].z;
    }
    const Tensor2 probs = decoder_->forward(*params_, batch, latent_, Mode::kEval, nullptr);
    for (std::size_t i = 0; i < n; ++i) out[start + i] = probs.data[i];
  }
}

OccnetResult reconstruct_occnet(const BinaryImage& silhouette, Stage1Model& stage1,
                                const MiseConfig& mise) {
  const Tensor2 latent = stage1.encoder.forward(stage1.params, silhouette, nullptr);
  const DecoderField field(stage1.decoder, stage1.params, latent);
  OccnetResult result;
  result.mesh = extract_mesh(field, mise);
  result.empty_warning = result.mesh.empty();
  return result;
}

DoccnetResult reconstruct_doccnet(const BinaryImage& silhouette, Stage1Model& stage1,
                                  Stage2Model& stage2, const PipelineConfig& cfg) {
  DoccnetResult result;
  OccnetResult first = reconstruct_occnet(silhouette, stage1, cfg.mise);
  if (first.mesh.empty()) {
    throw std::runtime_error("stage-1 produced no surface");
  }
  result.stage1_mesh = std::move(first.mesh);
  result.cloud = mesh_to_pointcloud(result.stage1_mesh, cfg.cloud_points, cfg.conversion_seed);

  const Tensor2 latent =
      stage2.encoder.forward(stage2.params, cloud_to_tensor(result.cloud), nullptr);
  const DecoderField field(stage2.decoder, stage2.params, latent);
  result.final_mesh = extract_mesh(field, cfg.mise);
  return result;
}

MetricsReport evaluate_run(const TriangleMesh& pred, const ShapeSpec& gt_spec,
                           std::size_t iou_samples, std::size_t surface_samples,
                           std::uint64_t seed) {
  MetricsReport report;
  report.iou_samples = iou_samples;
  report.surface_samples = surface_samples;
  report.seed = seed;

  const auto gt_field = make_field(gt_spec, 0.0);
  const MeshSolid pred_solid(pred);
  const FieldSolid gt_solid(*gt_field);
  report.iou = volumetric_iou(pred_solid, gt_solid, iou_samples, Rng::fork(seed, 21).next_u64());

  const TriangleMesh gt_mesh = ground_truth_mesh(gt_spec, 128);
  const std::uint64_t surf_seed = Rng::fork(seed, 22).next_u64();
  report.chamfer_l1 = chamfer_l1(pred, gt_mesh, surface_samples, surf_seed);
  report.normal_consistency = normal_consistency(pred, gt_mesh, surface_samples, surf_seed);
  return report;
}

}  // namespace ocfk

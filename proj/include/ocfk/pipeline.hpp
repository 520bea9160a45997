#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ocfk/checkpoint.hpp"
#include "ocfk/dataset.hpp"
#include "ocfk/extract.hpp"
#include "ocfk/field.hpp"
#include "ocfk/metrics.hpp"
#include "ocfk/models.hpp"

namespace ocfk {

struct TrainConfig {
  std::size_t batch_size = 64;
  std::size_t points_per_sample = 64;  // query points drawn per sample per step
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  std::size_t max_steps = 2000;
  std::size_t eval_every = 50;
  std::size_t eval_points = 256;  // 0 = all queries
  std::size_t patience = 10;      // evaluations without improvement before stopping
  double target_accuracy = 2.0;   // early exit when validation accuracy reaches this; > 1 disables
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainResult {
  Checkpoint best;  // best-validation snapshot (initialization when max_steps == 0)
  double best_val_loss = 0.0;
  std::size_t steps_run = 0;
};

// Minibatch BCE training of encoder + decoder. Validation runs on the
// samples outside the train split (or on the train split itself when there
// are none). One JSON object per evaluation goes to log when given.
TrainResult train_stage1(Stage1Model& model, const std::vector<TrainingSample>& samples,
                         const TrainConfig& cfg, std::ostream* log = nullptr);
TrainResult train_stage2(Stage2Model& model, const std::vector<TrainingSample>& samples,
                         const TrainConfig& cfg, std::ostream* log = nullptr);

struct EvalStats {
  double loss = 0.0;
  double accuracy = 0.0;  // fraction of queries classified correctly at tau = 0.5
};
// Eval-mode loss/accuracy over the given samples; points = 0 uses every query.
EvalStats evaluate_model(Stage1Model& model, const std::vector<TrainingSample>& samples,
                         std::size_t points = 0);
EvalStats evaluate_model(Stage2Model& model, const std::vector<TrainingSample>& samples,
                         std::size_t points = 0);

// Occupancy field induced by a trained decoder and a fixed latent.
class DecoderField : public OccupancyField {
 public:
  DecoderField(OccupancyDecoder& decoder, const ParamSet& params, Tensor2 latent);
  void evaluate(std::span<const Vec3> points, std::span<double> out) const override;

 private:
  OccupancyDecoder* decoder_;
  const ParamSet* params_;
  Tensor2 latent_;
};

Tensor2 cloud_to_tensor(const PointCloud& cloud);

struct PipelineConfig {
  MiseConfig mise;
  std::size_t cloud_points = 300;
  std::uint64_t conversion_seed = 0;
};

struct OccnetResult {
  TriangleMesh mesh;
  bool empty_warning = false;  // the field never crossed tau
};
OccnetResult reconstruct_occnet(const BinaryImage& silhouette, Stage1Model& stage1,
                                const MiseConfig& mise);

struct DoccnetResult {
  TriangleMesh final_mesh;
  TriangleMesh stage1_mesh;
  PointCloud cloud;
};
// Image -> mesh -> 300-point cloud -> mesh. Throws when stage 1 produces no
// surface.
DoccnetResult reconstruct_doccnet(const BinaryImage& silhouette, Stage1Model& stage1,
                                  Stage2Model& stage2, const PipelineConfig& cfg);

// All three metrics of a predicted mesh against the analytic ground truth:
// IoU against the exact field, Chamfer/normal consistency against a high-res
// extracted ground-truth mesh.
MetricsReport evaluate_run(const TriangleMesh& pred, const ShapeSpec& gt_spec,
                           std::size_t iou_samples = 100000, std::size_t surface_samples = 10000,
                           std::uint64_t seed = 0);

}  // namespace ocfk

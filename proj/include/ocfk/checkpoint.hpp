#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ocfk/models.hpp"
#include "ocfk/nn.hpp"

namespace ocfk {

// Binary container: magic "OCFK", format version, then a count-prefixed list
// of named little-endian f64 tensors. Trainable parameters use their model
// names; running statistics, optimizer state and the JSON architecture
// descriptor live under reserved "__…__" names. Round trips are bit exact.
struct Checkpoint {
  nlohmann::json meta;
  std::vector<std::pair<std::string, Tensor2>> tensors;

  const Tensor2* find(const std::string& name) const;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

Checkpoint snapshot(const Stage1Model& model, const AdamState* adam);
Checkpoint snapshot(const Stage2Model& model, const AdamState* adam);

void restore(Stage1Model& model, const Checkpoint& ckpt, AdamState* adam);
void restore(Stage2Model& model, const Checkpoint& ckpt, AdamState* adam);

// Rebuilds the stage model described by the checkpoint's metadata.
struct LoadedStage {
  int stage = 0;
  std::unique_ptr<Stage1Model> image_model;
  std::unique_ptr<Stage2Model> cloud_model;

  std::size_t latent_dim() const;
};
LoadedStage load_stage_model(const std::string& path);

}  // namespace ocfk

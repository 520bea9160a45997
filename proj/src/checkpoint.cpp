#include "ocfk/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include "ocfk/io_util.hpp"

namespace ocfk {

namespace {

constexpr char kMagic[4] = {'O', 'C', 'F', 'K'};
constexpr std::uint32_t kFormatVersion = 1;

const char* kMetaName = "__meta__";
const char* kAdamHyperName = "__adam__/hyper";

// JSON text is stored as one f64 per byte so every entry shares the single
// tensor codec.
Tensor2 text_to_tensor(const std::string& text) {
  Tensor2 t(1, text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    t.data[i] = static_cast<double>(static_cast<unsigned char>(text[i]));
  }
  return t;
}

std::string tensor_to_text(const Tensor2& t) {
  std::string text(t.size(), '\0');
  for (std::size_t i = 0; i < t.size(); ++i) {
    text[i] = static_cast<char>(static_cast<unsigned char>(t.data[i]));
  }
  return text;
}

void append_params(Checkpoint& ckpt, const ParamSet& params) {
  for (std::size_t i = 0; i < params.count(); ++i) {
    ckpt.tensors.emplace_back(params.name(i), params.value(i));
  }
}

void append_stats(Checkpoint& ckpt, const std::vector<CbnStats>& stats) {
  for (std::size_t i = 0; i < stats.size(); ++i) {
    const std::string base = "__stat__/cbn" + std::to_string(i);
    ckpt.tensors.emplace_back(base + "/mean", stats[i].mean);
    ckpt.tensors.emplace_back(base + "/var", stats[i].var);
  }
}

void append_adam(Checkpoint& ckpt, const ParamSet& params, const AdamState& adam) {
  Tensor2 hyper(1, 5);
  hyper.data = {adam.lr, adam.beta1, adam.beta2, adam.eps, static_cast<double>(adam.t)};
  ckpt.tensors.emplace_back(kAdamHyperName, hyper);
  for (std::size_t i = 0; i < params.count(); ++i) {
    ckpt.tensors.emplace_back("__adam__/m/" + params.name(i), adam.m[i]);
    ckpt.tensors.emplace_back("__adam__/v/" + params.name(i), adam.v[i]);
  }
}

void restore_params(ParamSet& params, const Checkpoint& ckpt) {
  for (std::size_t i = 0; i < params.count(); ++i) {
    const Tensor2* t = ckpt.find(params.name(i));
    if (!t) throw std::runtime_error("checkpoint missing parameter: " + params.name(i));
    if (!t->same_shape(params.value(i))) {
      throw std::runtime_error("checkpoint shape mismatch for: " + params.name(i));
    }
    params.value(i) = *t;
  }
}

void restore_stats(std::vector<CbnStats>& stats, const Checkpoint& ckpt) {
  for (std::size_t i = 0; i < stats.size(); ++i) {
    const std::string base = "__stat__/cbn" + std::to_string(i);
    const Tensor2* mean = ckpt.find(base + "/mean");
    const Tensor2* var = ckpt.find(base + "/var");
    if (!mean || !var) throw std::runtime_error("checkpoint missing statistics: " + base);
    stats[i].mean = *mean;
    stats[i].var = *var;
    stats[i].initialized = true;
  }
}

void restore_adam(AdamState& adam, const ParamSet& params, const Checkpoint& ckpt) {
  const Tensor2* hyper = ckpt.find(kAdamHyperName);
  if (!hyper) throw std::runtime_error("checkpoint has no optimizer state");
  adam.lr = hyper->data[0];
  adam.beta1 = hyper->data[1];
  adam.beta2 = hyper->data[2];
  adam.eps = hyper->data[3];
  adam.t = static_cast<std::uint64_t>(hyper->data[4]);
  adam.m.clear();
  adam.v.clear();
  for (std::size_t i = 0; i < params.count(); ++i) {
    const Tensor2* m = ckpt.find("__adam__/m/" + params.name(i));
    const Tensor2* v = ckpt.find("__adam__/v/" + params.name(i));
    if (!m || !v) throw std::runtime_error("checkpoint optimizer state incomplete");
    adam.m.push_back(*m);
    adam.v.push_back(*v);
  }
}

nlohmann::json arch_meta(int stage, const DecoderConfig& dc) {
  nlohmann::json j;
  j["stage"] = stage;
  j["latent_dim"] = dc.latent;
  j["blocks"] = dc.blocks;
  j["widths"] = std::vector<std::size_t>(dc.blocks, dc.hidden);
  return j;
}

}  // namespace

const Tensor2* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return &t;
  }
  return nullptr;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  AtomicFileWriter writer(path, true);
  std::ostream& os = writer.stream();
  os.write(kMagic, 4);
  write_u32(os, kFormatVersion);

  const Tensor2 meta_tensor = text_to_tensor(ckpt.meta.dump());
  write_u64(os, ckpt.tensors.size() + 1);

  auto write_entry = [&os](const std::string& name, const Tensor2& t) {
    write_u32(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u64(os, t.rows);
    write_u64(os, t.cols);
    write_f64_array(os, t.data.data(), t.size());
  };
  write_entry(kMetaName, meta_tensor);
  for (const auto& [name, tensor] : ckpt.tensors) write_entry(name, tensor);
  writer.commit();
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != std::string(kMagic, 4)) {
    throw std::runtime_error(path + ": not an OCFK checkpoint");
  }
  const std::uint32_t version = read_u32(in);
  if (version != kFormatVersion) {
    throw std::runtime_error(path + ": unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint64_t count = read_u64(in);
  Checkpoint ckpt;
  for (std::uint64_t e = 0; e < count; ++e) {
    const std::uint32_t name_len = read_u32(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw std::runtime_error(path + ": truncated checkpoint");
    Tensor2 t;
    t.rows = read_u64(in);
    t.cols = read_u64(in);
    t.data.resize(t.rows * t.cols);
    read_f64_array(in, t.data.data(), t.data.size());
    if (name == kMetaName) {
      ckpt.meta = nlohmann::json::parse(tensor_to_text(t));
    } else {
      ckpt.tensors.emplace_back(std::move(name), std::move(t));
    }
  }
  return ckpt;
}

Checkpoint snapshot(const Stage1Model& model, const AdamState* adam) {
  Checkpoint ckpt;
  ckpt.meta = arch_meta(1, model.decoder_cfg);
  ckpt.meta["encoder"] = {{"type", "conv2d"},
                          {"input_res", model.encoder_cfg.input_res},
                          {"channels", model.encoder_cfg.channels}};
  append_params(ckpt, model.params);
  append_stats(ckpt, model.decoder.stats);
  if (adam) append_adam(ckpt, model.params, *adam);
  return ckpt;
}

Checkpoint snapshot(const Stage2Model& model, const AdamState* adam) {
  Checkpoint ckpt;
  ckpt.meta = arch_meta(2, model.decoder_cfg);
  ckpt.meta["encoder"] = {{"type", "pointnet"},
                          {"mlp_widths", model.encoder_cfg.mlp_widths},
                          {"n_points", model.encoder_cfg.n_points}};
  append_params(ckpt, model.params);
  append_stats(ckpt, model.decoder.stats);
  if (adam) append_adam(ckpt, model.params, *adam);
  return ckpt;
}

void restore(Stage1Model& model, const Checkpoint& ckpt, AdamState* adam) {
  restore_params(model.params, ckpt);
  restore_stats(model.decoder.stats, ckpt);
  if (adam) restore_adam(*adam, model.params, ckpt);
}

void restore(Stage2Model& model, const Checkpoint& ckpt, AdamState* adam) {
  restore_params(model.params, ckpt);
  restore_stats(model.decoder.stats, ckpt);
  if (adam) restore_adam(*adam, model.params, ckpt);
}

std::size_t LoadedStage::latent_dim() const {
  return stage == 1 ? image_model->decoder_cfg.latent : cloud_model->decoder_cfg.latent;
}

LoadedStage load_stage_model(const std::string& path) {
  const Checkpoint ckpt = load_checkpoint(path);
  if (!ckpt.meta.contains("stage")) {
    throw std::runtime_error(path + ": checkpoint lacks architecture metadata");
  }
  LoadedStage loaded;
  loaded.stage = ckpt.meta.at("stage").get<int>();

  DecoderConfig dc;
  dc.latent = ckpt.meta.at("latent_dim").get<std::size_t>();
  dc.blocks = ckpt.meta.at("blocks").get<std::size_t>();
  const auto widths = ckpt.meta.at("widths").get<std::vector<std::size_t>>();
  if (!widths.empty()) dc.hidden = widths.front();

  const nlohmann::json& enc = ckpt.meta.at("encoder");
  if (loaded.stage == 1) {
    ImageEncoderConfig ec;
    ec.input_res = enc.at("input_res").get<int>();
    ec.channels = enc.at("channels").get<std::vector<int>>();
    ec.latent = dc.latent;
    loaded.image_model = std::make_unique<Stage1Model>(ec, dc, 0);
    restore(*loaded.image_model, ckpt, nullptr);
  } else if (loaded.stage == 2) {
    PointNetConfig ec;
    ec.mlp_widths = enc.at("mlp_widths").get<std::vector<std::size_t>>();
    ec.n_points = enc.at("n_points").get<std::size_t>();
    ec.latent = dc.latent;
    loaded.cloud_model = std::make_unique<Stage2Model>(ec, dc, 0);
    restore(*loaded.cloud_model, ckpt, nullptr);
  } else {
    throw std::runtime_error(path + ": unknown stage " + std::to_string(loaded.stage));
  }
  return loaded;
}

}  // namespace ocfk

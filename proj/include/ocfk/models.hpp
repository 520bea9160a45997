#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ocfk/image.hpp"
#include "ocfk/nn.hpp"
#include "ocfk/tensor.hpp"

namespace ocfk {

// ---------------------------------------------------------------------------
// Small parameter-owning building blocks. Parameters live in the enclosing
// model's ParamSet; modules keep indices and accumulate gradients there.

struct DenseModule {
  std::size_t w = 0, b = 0;

  void init(ParamSet& params, const std::string& prefix, std::size_t d_in, std::size_t d_out);
  Tensor2 forward(const ParamSet& params, const Tensor2& x) const;
  // Accumulates dw/db into the ParamSet, returns dx.
  Tensor2 backward(ParamSet& params, const Tensor2& x, const Tensor2& dy) const;
};

struct CbnModule {
  std::size_t gamma_w = 0, gamma_b = 0, beta_w = 0, beta_b = 0;

  void init(ParamSet& params, const std::string& prefix, std::size_t latent_dim,
            std::size_t features);
  Tensor2 forward(const ParamSet& params, CbnStats& stats, const Tensor2& f_in, const Tensor2& c,
                  Mode mode, CbnCache* cache) const;
  // Accumulates map gradients, adds the latent gradient into dc, returns d_fin.
  Tensor2 backward(ParamSet& params, const CbnCache& cache, const Tensor2& d_fout,
                   Tensor2& dc) const;
};

// ---------------------------------------------------------------------------
// Occupancy decoder: FC lift to the hidden width, five residual blocks of
// (CBN, ReLU, FC) twice with a skip, then CBN, ReLU and a sigmoid head.

struct DecoderConfig {
  std::size_t hidden = 256;
  std::size_t blocks = 5;
  std::size_t latent = 256;
};

struct DecoderBlockCache {
  CbnCache cbn1, cbn2;
  Tensor2 a1, r1, a2, r2;
};

struct DecoderCache {
  Tensor2 points;
  std::vector<DecoderBlockCache> blocks;
  CbnCache final_cbn;
  Tensor2 a_final, r_final;
  Tensor2 probs;
  // Smallest |pre-activation| that hit a ReLU; finite-difference tests use it
  // to reject seeds that land near the kink.
  double min_relu_abs = std::numeric_limits<double>::infinity();
};

class OccupancyDecoder {
 public:
  OccupancyDecoder() = default;
  void init(ParamSet& params, const DecoderConfig& cfg, const std::string& prefix, Rng& rng);

  // points: N x 3, latent: 1 x L -> probabilities N x 1, strictly in (0, 1).
  Tensor2 forward(const ParamSet& params, const Tensor2& points, const Tensor2& latent, Mode mode,
                  DecoderCache* cache);
  // Returns the latent gradient (1 x L).
  Tensor2 backward(ParamSet& params, const DecoderCache& cache, const Tensor2& d_probs) const;

  const DecoderConfig& config() const { return cfg_; }

  std::vector<CbnStats> stats;  // 2 per block + 1 final, checkpointable

 private:
  struct Block {
    CbnModule cbn1, cbn2;
    DenseModule fc1, fc2;
  };

  DecoderConfig cfg_;
  std::string prefix_;
  DenseModule lift_;
  std::vector<Block> blocks_;
  CbnModule final_cbn_;
  DenseModule head_;
};

// ---------------------------------------------------------------------------
// PointNet-style cloud encoder: shared per-point MLP, feature-wise max pool,
// FC head. No input/feature transform subnetworks.

struct PointNetConfig {
  std::vector<std::size_t> mlp_widths{64, 128, 512};
  std::size_t latent = 512;
  std::size_t n_points = 300;
};

struct PointNetCache {
  std::vector<Tensor2> layer_inputs;  // input to each dense layer
  std::vector<Tensor2> pre_relu;      // dense outputs before relu
  Tensor2 pooled;                     // 1 x last width
  std::vector<std::size_t> argmax;    // row index per feature, lowest on ties
  double min_relu_abs = std::numeric_limits<double>::infinity();
};

class PointNetEncoder {
 public:
  PointNetEncoder() = default;
  void init(ParamSet& params, const PointNetConfig& cfg, const std::string& prefix, Rng& rng);

  // points: n x 3 with n == cfg.n_points -> latent 1 x cfg.latent.
  Tensor2 forward(const ParamSet& params, const Tensor2& points, PointNetCache* cache) const;
  void backward(ParamSet& params, const PointNetCache& cache, const Tensor2& d_latent) const;

  const PointNetConfig& config() const { return cfg_; }

 private:
  PointNetConfig cfg_;
  std::vector<DenseModule> mlp_;
  DenseModule head_;
};

// ---------------------------------------------------------------------------
// Convolutional silhouette encoder: 3x3 stride-2 conv stack, ReLU after each
// conv, FC to the latent.

struct ImageEncoderConfig {
  int input_res = 32;
  std::vector<int> channels{8, 16, 32, 64};
  std::size_t latent = 256;
};

struct ConvShape {
  int in_channels, in_res, out_channels, out_res;
};

struct ImageEncoderCache {
  std::vector<Tensor2> layer_inputs;  // feature maps entering each conv
  std::vector<Tensor2> pre_relu;
  Tensor2 flat;  // head input
  double min_relu_abs = std::numeric_limits<double>::infinity();
};

class ImageEncoder {
 public:
  ImageEncoder() = default;
  void init(ParamSet& params, const ImageEncoderConfig& cfg, const std::string& prefix, Rng& rng);

  Tensor2 forward(const ParamSet& params, const BinaryImage& image, ImageEncoderCache* cache) const;
  Tensor2 forward(const ParamSet& params, const Tensor2& input, ImageEncoderCache* cache) const;
  void backward(ParamSet& params, const ImageEncoderCache& cache, const Tensor2& d_latent) const;

  const ImageEncoderConfig& config() const { return cfg_; }

 private:
  ImageEncoderConfig cfg_;
  std::vector<ConvShape> shapes_;
  std::vector<std::size_t> kernels_;  // ParamSet indices, [Cout x Cin*9]
  std::vector<std::size_t> biases_;   // [1 x Cout]
  DenseModule head_;
};

// Feature maps as [channels x (res*res)] row-major tensors.
Tensor2 image_to_tensor(const BinaryImage& image);

// ---------------------------------------------------------------------------
// Stage models: encoder + decoder sharing one ParamSet.

struct Stage1Model {
  ParamSet params;
  ImageEncoderConfig encoder_cfg;
  DecoderConfig decoder_cfg;
  ImageEncoder encoder;
  OccupancyDecoder decoder;

  Stage1Model(const ImageEncoderConfig& ec, const DecoderConfig& dc, std::uint64_t seed);
  static Stage1Model standard(std::uint64_t seed) { return Stage1Model({}, {256, 5, 256}, seed); }
};

struct Stage2Model {
  ParamSet params;
  PointNetConfig encoder_cfg;
  DecoderConfig decoder_cfg;
  PointNetEncoder encoder;
  OccupancyDecoder decoder;

  Stage2Model(const PointNetConfig& ec, const DecoderConfig& dc, std::uint64_t seed);
  static Stage2Model standard(std::uint64_t seed) { return Stage2Model({}, {256, 5, 512}, seed); }
};

}  // namespace ocfk

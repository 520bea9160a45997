#include "ocfk/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ocfk {

namespace {

void track_relu_margin(const Tensor2& pre, double& min_abs) {
  for (double v : pre.data) min_abs = std::min(min_abs, std::abs(v));
}

}  // namespace

// ---------------------------------------------------------------------------
// DenseModule / CbnModule

void DenseModule::init(ParamSet& params, const std::string& prefix, std::size_t d_in,
                       std::size_t d_out) {
  w = params.add(prefix + ".w", d_in, d_out);
  b = params.add(prefix + ".b", 1, d_out);
}

Tensor2 DenseModule::forward(const ParamSet& params, const Tensor2& x) const {
  return dense_forward(x, params.value(w), params.value(b));
}

Tensor2 DenseModule::backward(ParamSet& params, const Tensor2& x, const Tensor2& dy) const {
  DenseGrads g = dense_backward(x, params.value(w), dy);
  Tensor2& gw = params.grad(w);
  Tensor2& gb = params.grad(b);
  for (std::size_t j = 0; j < gw.size(); ++j) gw.data[j] += g.dw.data[j];
  for (std::size_t j = 0; j < gb.size(); ++j) gb.data[j] += g.db.data[j];
  return std::move(g.dx);
}

void CbnModule::init(ParamSet& params, const std::string& prefix, std::size_t latent_dim,
                     std::size_t features) {
  gamma_w = params.add(prefix + ".gamma_w", latent_dim, features);
  gamma_b = params.add(prefix + ".gamma_b", 1, features);
  beta_w = params.add(prefix + ".beta_w", latent_dim, features);
  beta_b = params.add(prefix + ".beta_b", 1, features);
  // start as identity: gamma(c) = 1, beta(c) = 0 for every latent
  params.value(gamma_b).fill(1.0);
}

Tensor2 CbnModule::forward(const ParamSet& params, CbnStats& stats, const Tensor2& f_in,
                           const Tensor2& c, Mode mode, CbnCache* cache) const {
  return cbn_forward(f_in, c, params.value(gamma_w), params.value(gamma_b), params.value(beta_w),
                     params.value(beta_b), stats, mode, cache);
}

Tensor2 CbnModule::backward(ParamSet& params, const CbnCache& cache, const Tensor2& d_fout,
                            Tensor2& dc) const {
  CbnGrads g = cbn_backward(cache, params.value(gamma_w), params.value(beta_w), d_fout);
  auto accumulate = [&](std::size_t idx, const Tensor2& src) {
    Tensor2& dst = params.grad(idx);
    for (std::size_t j = 0; j < dst.size(); ++j) dst.data[j] += src.data[j];
  };
  accumulate(gamma_w, g.d_gamma_w);
  accumulate(gamma_b, g.d_gamma_b);
  accumulate(beta_w, g.d_beta_w);
  accumulate(beta_b, g.d_beta_b);
  for (std::size_t j = 0; j < dc.size(); ++j) dc.data[j] += g.d_c.data[j];
  return std::move(g.d_fin);
}

// ---------------------------------------------------------------------------
// OccupancyDecoder

void OccupancyDecoder::init(ParamSet& params, const DecoderConfig& cfg, const std::string& prefix,
                            Rng& rng) {
  cfg_ = cfg;
  prefix_ = prefix;
  lift_.init(params, prefix + "lift", 3, cfg.hidden);
  init_glorot(params.value(lift_.w), rng);

  blocks_.clear();
  blocks_.resize(cfg.blocks);
  for (std::size_t i = 0; i < cfg.blocks; ++i) {
    const std::string bp = prefix + "block" + std::to_string(i);
    Block& blk = blocks_[i];
    blk.cbn1.init(params, bp + ".cbn1", cfg.latent, cfg.hidden);
    blk.fc1.init(params, bp + ".fc1", cfg.hidden, cfg.hidden);
    init_glorot(params.value(blk.fc1.w), rng);
    blk.cbn2.init(params, bp + ".cbn2", cfg.latent, cfg.hidden);
    blk.fc2.init(params, bp + ".fc2", cfg.hidden, cfg.hidden);
    init_glorot(params.value(blk.fc2.w), rng);
  }
  final_cbn_.init(params, prefix + "final_cbn", cfg.latent, cfg.hidden);
  // head stays zero-initialized so the untrained field is exactly 0.5
  head_.init(params, prefix + "head", cfg.hidden, 1);

  stats.assign(2 * cfg.blocks + 1, CbnStats{});
  for (CbnStats& s : stats) s.init(cfg.hidden);
}

Tensor2 OccupancyDecoder::forward(const ParamSet& params, const Tensor2& points,
                                  const Tensor2& latent, Mode mode, DecoderCache* cache) {
  if (points.cols != 3) throw std::invalid_argument("decoder: points must be N x 3");
  require_shape(latent, 1, cfg_.latent, "decoder latent");
  if (mode == Mode::kTrain && points.rows < 2) {
    throw std::invalid_argument("decoder: train mode needs at least 2 points");
  }

  if (cache) {
    cache->points = points;
    cache->blocks.assign(cfg_.blocks, DecoderBlockCache{});
    cache->min_relu_abs = std::numeric_limits<double>::infinity();
  }

  Tensor2 h = lift_.forward(params, points);
  for (std::size_t i = 0; i < cfg_.blocks; ++i) {
    Block& blk = blocks_[i];
    DecoderBlockCache* bc = cache ? &cache->blocks[i] : nullptr;

    Tensor2 a1 = blk.cbn1.forward(params, stats[2 * i], h, latent, mode, bc ? &bc->cbn1 : nullptr);
    if (cache) track_relu_margin(a1, cache->min_relu_abs);
    Tensor2 r1 = relu(a1);
    Tensor2 u1 = blk.fc1.forward(params, r1);

    Tensor2 a2 =
        blk.cbn2.forward(params, stats[2 * i + 1], u1, latent, mode, bc ? &bc->cbn2 : nullptr);
    if (cache) track_relu_margin(a2, cache->min_relu_abs);
    Tensor2 r2 = relu(a2);
    Tensor2 u2 = blk.fc2.forward(params, r2);

    for (std::size_t j = 0; j < h.size(); ++j) h.data[j] += u2.data[j];

    if (bc) {
      bc->a1 = std::move(a1);
      bc->r1 = std::move(r1);
      bc->a2 = std::move(a2);
      bc->r2 = std::move(r2);
    }
  }

  Tensor2 a_final =
      final_cbn_.forward(params, stats[2 * cfg_.blocks], h, latent, mode,
                         cache ? &cache->final_cbn : nullptr);
  if (cache) track_relu_margin(a_final, cache->min_relu_abs);
  Tensor2 r_final = relu(a_final);
  Tensor2 logits = head_.forward(params, r_final);
  Tensor2 probs = sigmoid(logits);

  if (cache) {
    cache->a_final = std::move(a_final);
    cache->r_final = std::move(r_final);
    cache->probs = probs;
  }
  return probs;
}

Tensor2 OccupancyDecoder::backward(ParamSet& params, const DecoderCache& cache,
                                   const Tensor2& d_probs) const {
  Tensor2 dc(1, cfg_.latent);
  Tensor2 d_logits = sigmoid_backward_from_output(cache.probs, d_probs);
  Tensor2 d_rf = head_.backward(params, cache.r_final, d_logits);
  Tensor2 d_af = relu_backward(cache.a_final, d_rf);
  Tensor2 d_h = final_cbn_.backward(params, cache.final_cbn, d_af, dc);

  for (std::size_t i = cfg_.blocks; i-- > 0;) {
    const Block& blk = blocks_[i];
    const DecoderBlockCache& bc = cache.blocks[i];
    // d_h carries the gradient at the block output; the skip feeds it
    // straight through to the block input as well.
    Tensor2 d_r2 = blk.fc2.backward(params, bc.r2, d_h);
    Tensor2 d_a2 = relu_backward(bc.a2, d_r2);
    Tensor2 d_u1 = blk.cbn2.backward(params, bc.cbn2, d_a2, dc);
    Tensor2 d_r1 = blk.fc1.backward(params, bc.r1, d_u1);
    Tensor2 d_a1 = relu_backward(bc.a1, d_r1);
    Tensor2 d_res = blk.cbn1.backward(params, bc.cbn1, d_a1, dc);
    for (std::size_t j = 0; j < d_h.size(); ++j) d_h.data[j] += d_res.data[j];
  }

  lift_.backward(params, cache.points, d_h);
  return dc;
}

// ---------------------------------------------------------------------------
// PointNetEncoder

void PointNetEncoder::init(ParamSet& params, const PointNetConfig& cfg, const std::string& prefix,
                           Rng& rng) {
  if (cfg.mlp_widths.empty()) throw std::invalid_argument("pointnet: empty MLP");
  cfg_ = cfg;
  mlp_.clear();
  std::size_t d_in = 3;
  for (std::size_t i = 0; i < cfg.mlp_widths.size(); ++i) {
    DenseModule layer;
    layer.init(params, prefix + "mlp" + std::to_string(i), d_in, cfg.mlp_widths[i]);
    init_glorot(params.value(layer.w), rng);
    mlp_.push_back(layer);
    d_in = cfg.mlp_widths[i];
  }
  head_.init(params, prefix + "head", cfg.mlp_widths.back(), cfg.latent);
  init_glorot(params.value(head_.w), rng);
}

Tensor2 PointNetEncoder::forward(const ParamSet& params, const Tensor2& points,
                                 PointNetCache* cache) const {
  if (points.cols != 3 || points.rows != cfg_.n_points) {
    throw std::invalid_argument("pointnet: expected " + std::to_string(cfg_.n_points) +
                                " x 3 points, got " + std::to_string(points.rows) + " x " +
                                std::to_string(points.cols));
  }
  if (cache) {
    cache->layer_inputs.clear();
    cache->pre_relu.clear();
    cache->min_relu_abs = std::numeric_limits<double>::infinity();
  }

  Tensor2 x = points;
  for (const DenseModule& layer : mlp_) {
    if (cache) cache->layer_inputs.push_back(x);
    Tensor2 z = layer.forward(params, x);
    if (cache) {
      track_relu_margin(z, cache->min_relu_abs);
      cache->pre_relu.push_back(z);
    }
    x = relu(z);
  }

  // feature-wise max over points; lowest row wins ties so gradient routing
  // is deterministic
  const std::size_t features = x.cols;
  Tensor2 pooled(1, features);
  std::vector<std::size_t> argmax(features, 0);
  for (std::size_t f = 0; f < features; ++f) {
    double best = x(0, f);
    std::size_t best_i = 0;
    for (std::size_t i = 1; i < x.rows; ++i) {
      if (x(i, f) > best) {
        best = x(i, f);
        best_i = i;
      }
    }
    pooled.data[f] = best;
    argmax[f] = best_i;
  }

  Tensor2 latent = head_.forward(params, pooled);
  if (cache) {
    cache->pooled = std::move(pooled);
    cache->argmax = std::move(argmax);
  }
  return latent;
}

void PointNetEncoder::backward(ParamSet& params, const PointNetCache& cache,
                               const Tensor2& d_latent) const {
  Tensor2 d_pooled = head_.backward(params, cache.pooled, d_latent);

  const Tensor2& last_pre = cache.pre_relu.back();
  Tensor2 d_x(last_pre.rows, last_pre.cols);
  for (std::size_t f = 0; f < d_pooled.size(); ++f) {
    d_x(cache.argmax[f], f) = d_pooled.data[f];
  }

  for (std::size_t i = mlp_.size(); i-- > 0;) {
    Tensor2 d_z = relu_backward(cache.pre_relu[i], d_x);
    d_x = mlp_[i].backward(params, cache.layer_inputs[i], d_z);
  }
}

// ---------------------------------------------------------------------------
// ImageEncoder

namespace {

// 3x3 kernels, stride 2, zero padding 1. Feature maps are [C x (res*res)].
Tensor2 conv_forward(const Tensor2& in, const ConvShape& s, const Tensor2& kernel,
                     const Tensor2& bias) {
  Tensor2 out(s.out_channels, static_cast<std::size_t>(s.out_res) * s.out_res);
  for (int co = 0; co < s.out_channels; ++co) {
    const double* kc = kernel.row(co);
    double* oc = out.row(co);
    for (int oy = 0; oy < s.out_res; ++oy) {
      for (int ox = 0; ox < s.out_res; ++ox) {
        double acc = bias.data[co];
        for (int ci = 0; ci < s.in_channels; ++ci) {
          const double* ic = in.row(ci);
          const double* kk = kc + ci * 9;
          for (int ky = 0; ky < 3; ++ky) {
            const int iy = 2 * oy + ky - 1;
            if (iy < 0 || iy >= s.in_res) continue;
            for (int kx = 0; kx < 3; ++kx) {
              const int ix = 2 * ox + kx - 1;
              if (ix < 0 || ix >= s.in_res) continue;
              acc += ic[iy * s.in_res + ix] * kk[ky * 3 + kx];
            }
          }
        }
        oc[oy * s.out_res + ox] = acc;
      }
    }
  }
  return out;
}

void conv_backward(const Tensor2& in, const ConvShape& s, const Tensor2& kernel,
                   const Tensor2& d_out, Tensor2& d_in, Tensor2& d_kernel, Tensor2& d_bias) {
  d_in = Tensor2(in.rows, in.cols);
  for (int co = 0; co < s.out_channels; ++co) {
    const double* kc = kernel.row(co);
    double* dkc = d_kernel.row(co);
    const double* doc = d_out.row(co);
    for (int oy = 0; oy < s.out_res; ++oy) {
      for (int ox = 0; ox < s.out_res; ++ox) {
        const double g = doc[oy * s.out_res + ox];
        d_bias.data[co] += g;
        for (int ci = 0; ci < s.in_channels; ++ci) {
          const double* ic = in.row(ci);
          double* dic = d_in.row(ci);
          const double* kk = kc + ci * 9;
          double* dkk = dkc + ci * 9;
          for (int ky = 0; ky < 3; ++ky) {
            const int iy = 2 * oy + ky - 1;
            if (iy < 0 || iy >= s.in_res) continue;
            for (int kx = 0; kx < 3; ++kx) {
              const int ix = 2 * ox + kx - 1;
              if (ix < 0 || ix >= s.in_res) continue;
              dkk[ky * 3 + kx] += g * ic[iy * s.in_res + ix];
              dic[iy * s.in_res + ix] += g * kk[ky * 3 + kx];
            }
          }
        }
      }
    }
  }
}

}  // namespace

void ImageEncoder::init(ParamSet& params, const ImageEncoderConfig& cfg, const std::string& prefix,
                        Rng& rng) {
  if (cfg.channels.empty()) throw std::invalid_argument("image encoder: empty conv stack");
  cfg_ = cfg;
  shapes_.clear();
  kernels_.clear();
  biases_.clear();

  int res = cfg.input_res;
  int in_ch = 1;
  for (std::size_t i = 0; i < cfg.channels.size(); ++i) {
    if (res < 2) throw std::invalid_argument("image encoder: input resolution too small");
    const int out_res = (res - 1) / 2 + 1;
    shapes_.push_back(ConvShape{in_ch, res, cfg.channels[i], out_res});
    const std::string cp = prefix + "conv" + std::to_string(i);
    kernels_.push_back(params.add(cp + ".k", cfg.channels[i], static_cast<std::size_t>(in_ch) * 9));
    biases_.push_back(params.add(cp + ".b", 1, cfg.channels[i]));
    // Glorot over the receptive field
    Tensor2& k = params.value(kernels_.back());
    const double bound = std::sqrt(6.0 / static_cast<double>(in_ch * 9 + cfg.channels[i] * 9));
    for (double& v : k.data) v = rng.uniform(-bound, bound);
    in_ch = cfg.channels[i];
    res = out_res;
  }
  const std::size_t flat = static_cast<std::size_t>(in_ch) * res * res;
  head_.init(params, prefix + "head", flat, cfg.latent);
  init_glorot(params.value(head_.w), rng);
}

Tensor2 image_to_tensor(const BinaryImage& image) {
  Tensor2 t(1, static_cast<std::size_t>(image.width) * image.height);
  for (std::size_t i = 0; i < t.size(); ++i) t.data[i] = image.pixels[i] ? 1.0 : 0.0;
  return t;
}

Tensor2 ImageEncoder::forward(const ParamSet& params, const BinaryImage& image,
                              ImageEncoderCache* cache) const {
  if (image.width != cfg_.input_res || image.height != cfg_.input_res) {
    throw std::invalid_argument("image encoder: expected " + std::to_string(cfg_.input_res) + "x" +
                                std::to_string(cfg_.input_res) + " input, got " +
                                std::to_string(image.width) + "x" + std::to_string(image.height));
  }
  for (std::uint8_t p : image.pixels) {
    if (p > 1) throw std::invalid_argument("image encoder: silhouette must be binary");
  }
  return forward(params, image_to_tensor(image), cache);
}

Tensor2 ImageEncoder::forward(const ParamSet& params, const Tensor2& input,
                              ImageEncoderCache* cache) const {
  if (input.size() != static_cast<std::size_t>(cfg_.input_res) * cfg_.input_res) {
    throw std::invalid_argument("image encoder: wrong input resolution");
  }
  if (cache) {
    cache->layer_inputs.clear();
    cache->pre_relu.clear();
    cache->min_relu_abs = std::numeric_limits<double>::infinity();
  }

  Tensor2 x(1, input.size());
  x.data = input.data;
  for (std::size_t i = 0; i < shapes_.size(); ++i) {
    if (cache) cache->layer_inputs.push_back(x);
    Tensor2 z = conv_forward(x, shapes_[i], params.value(kernels_[i]), params.value(biases_[i]));
    if (cache) {
      track_relu_margin(z, cache->min_relu_abs);
      cache->pre_relu.push_back(z);
    }
    x = relu(z);
  }

  Tensor2 flat(1, x.size());
  flat.data = x.data;
  Tensor2 latent = head_.forward(params, flat);
  if (cache) cache->flat = std::move(flat);
  return latent;
}

void ImageEncoder::backward(ParamSet& params, const ImageEncoderCache& cache,
                            const Tensor2& d_latent) const {
  Tensor2 d_flat = head_.backward(params, cache.flat, d_latent);

  const Tensor2& last_pre = cache.pre_relu.back();
  Tensor2 d_x(last_pre.rows, last_pre.cols);
  d_x.data = d_flat.data;

  for (std::size_t i = shapes_.size(); i-- > 0;) {
    Tensor2 d_z = relu_backward(cache.pre_relu[i], d_x);
    Tensor2 d_in(1, 1), d_k = Tensor2(params.value(kernels_[i]).rows,
                                      params.value(kernels_[i]).cols);
    Tensor2 d_b(1, params.value(biases_[i]).cols);
    conv_backward(cache.layer_inputs[i], shapes_[i], params.value(kernels_[i]), d_z, d_in, d_k,
                  d_b);
    Tensor2& gk = params.grad(kernels_[i]);
    Tensor2& gb = params.grad(biases_[i]);
    for (std::size_t j = 0; j < gk.size(); ++j) gk.data[j] += d_k.data[j];
    for (std::size_t j = 0; j < gb.size(); ++j) gb.data[j] += d_b.data[j];
    d_x = std::move(d_in);
  }
}

// ---------------------------------------------------------------------------
// Stage models

Stage1Model::Stage1Model(const ImageEncoderConfig& ec, const DecoderConfig& dc,
                         std::uint64_t seed) {
  encoder_cfg = ec;
  decoder_cfg = dc;
  if (ec.latent != dc.latent) {
    throw std::invalid_argument("stage 1: encoder latent dim must match decoder");
  }
  Rng rng = Rng::fork(seed, 1);
  encoder.init(params, ec, "enc.", rng);
  decoder.init(params, dc, "dec.", rng);
}

Stage2Model::Stage2Model(const PointNetConfig& ec, const DecoderConfig& dc, std::uint64_t seed) {
  encoder_cfg = ec;
  decoder_cfg = dc;
  if (ec.latent != dc.latent) {
    throw std::invalid_argument("stage 2: encoder latent dim must match decoder");
  }
  Rng rng = Rng::fork(seed, 2);
  encoder.init(params, ec, "enc.", rng);
  decoder.init(params, dc, "dec.", rng);
}

}  // namespace ocfk

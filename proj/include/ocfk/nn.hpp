#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ocfk/rng.hpp"
#include "ocfk/tensor.hpp"

namespace ocfk {

enum class Mode { kTrain, kEval };

// ---------------------------------------------------------------------------
// Parameters

// Ordered collection of named trainable tensors with gradient slots.
// Iteration order is registration order, which makes optimizer state and
// checkpoints reproducible.
class ParamSet {
 public:
  std::size_t add(std::string name, std::size_t rows, std::size_t cols);

  std::size_t count() const { return values_.size(); }
  const std::string& name(std::size_t i) const { return names_[i]; }

  Tensor2& value(std::size_t i) { return values_[i]; }
  const Tensor2& value(std::size_t i) const { return values_[i]; }
  Tensor2& grad(std::size_t i) { return grads_[i]; }
  const Tensor2& grad(std::size_t i) const { return grads_[i]; }

  bool has(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;  // throws if absent
  Tensor2& value(std::string_view name) { return values_[index_of(name)]; }
  Tensor2& grad(std::string_view name) { return grads_[index_of(name)]; }

  void zero_grads();

 private:
  std::vector<std::string> names_;
  std::vector<Tensor2> values_;
  std::vector<Tensor2> grads_;
};

struct AdamState {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t t = 0;
  std::vector<Tensor2> m;
  std::vector<Tensor2> v;

  void init_like(const ParamSet& params);
};

// One Adam update with bias correction over every parameter, then zeroes
// the gradients.
void adam_step(ParamSet& params, AdamState& state);

// Glorot-uniform initialization for a [d_in x d_out] weight matrix.
void init_glorot(Tensor2& w, Rng& rng);

// ---------------------------------------------------------------------------
// Layers

// y = x W + b, bias broadcast over rows.
Tensor2 dense_forward(const Tensor2& x, const Tensor2& w, const Tensor2& b);

struct DenseGrads {
  Tensor2 dx, dw, db;
};
DenseGrads dense_backward(const Tensor2& x, const Tensor2& w, const Tensor2& dy);

Tensor2 relu(const Tensor2& x);
Tensor2 relu_backward(const Tensor2& x, const Tensor2& dy);

// Numerically safe logistic; output strictly inside (0, 1) for all finite
// inputs.
double sigmoid_scalar(double x);
Tensor2 sigmoid(const Tensor2& x);
// dy/dx given the forward output p = sigmoid(x).
Tensor2 sigmoid_backward_from_output(const Tensor2& p, const Tensor2& dy);

struct BceResult {
  double loss = 0.0;
  Tensor2 dp;
};
// Mean binary cross entropy; probabilities clamped to [1e-12, 1-1e-12]
// before the logs.
BceResult bce_loss(const Tensor2& p, const Tensor2& y);

// ---------------------------------------------------------------------------
// Conditional batch normalization
//
// f_out = gamma(c) * (f_in - mu) / sqrt(var + eps) + beta(c), where gamma and
// beta are affine maps of the latent c and mu/var are per-feature moments of
// the f_in rows (train mode) or running statistics (eval mode).

inline constexpr double kCbnEpsilon = 1e-5;
inline constexpr double kCbnMomentum = 0.9;

// Running statistics; updated in train mode with momentum 0.9.
struct CbnStats {
  Tensor2 mean;  // 1 x F
  Tensor2 var;   // 1 x F
  bool initialized = false;

  void init(std::size_t features);
};

struct CbnCache {
  Tensor2 x_hat;     // N x F, normalized pre-affine activations
  Tensor2 centered;  // N x F, f_in - mu
  Tensor2 inv_std;   // 1 x F
  Tensor2 gamma;     // 1 x F
  Tensor2 c;         // 1 x L
  Tensor2 mean;      // 1 x F (the moments actually used)
  Tensor2 var;       // 1 x F
};

Tensor2 cbn_forward(const Tensor2& f_in, const Tensor2& c, const Tensor2& gamma_w,
                    const Tensor2& gamma_b, const Tensor2& beta_w, const Tensor2& beta_b,
                    CbnStats& stats, Mode mode, CbnCache* cache, double eps = kCbnEpsilon);

struct CbnGrads {
  Tensor2 d_fin;
  Tensor2 d_gamma_w, d_gamma_b;
  Tensor2 d_beta_w, d_beta_b;
  Tensor2 d_c;
};
// Exact gradients of the train-mode forward, including the dependence of
// the batch moments on f_in.
CbnGrads cbn_backward(const CbnCache& cache, const Tensor2& gamma_w, const Tensor2& beta_w,
                      const Tensor2& d_fout);

}  // namespace ocfk

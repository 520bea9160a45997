#include "ocfk/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace ocfk {

// ---------------------------------------------------------------------------
// ParamSet / Adam

std::size_t ParamSet::add(std::string name, std::size_t rows, std::size_t cols) {
  if (has(name)) throw std::invalid_argument("duplicate parameter name: " + name);
  names_.push_back(std::move(name));
  values_.emplace_back(rows, cols, 0.0);
  grads_.emplace_back(rows, cols, 0.0);
  return values_.size() - 1;
}

bool ParamSet::has(std::string_view name) const {
  for (const std::string& n : names_) {
    if (n == name) return true;
  }
  return false;
}

std::size_t ParamSet::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  throw std::invalid_argument("unknown parameter: " + std::string(name));
}

void ParamSet::zero_grads() {
  for (Tensor2& g : grads_) g.fill(0.0);
}

void AdamState::init_like(const ParamSet& params) {
  t = 0;
  m.clear();
  v.clear();
  for (std::size_t i = 0; i < params.count(); ++i) {
    m.emplace_back(params.value(i).rows, params.value(i).cols, 0.0);
    v.emplace_back(params.value(i).rows, params.value(i).cols, 0.0);
  }
}

void adam_step(ParamSet& params, AdamState& state) {
  if (state.m.size() != params.count()) {
    throw std::invalid_argument("adam_step: state not initialized for this parameter set");
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.count(); ++i) {
    Tensor2& value = params.value(i);
    Tensor2& grad = params.grad(i);
    Tensor2& m = state.m[i];
    Tensor2& v = state.v[i];
    for (std::size_t j = 0; j < value.size(); ++j) {
      const double g = grad.data[j];
      m.data[j] = state.beta1 * m.data[j] + (1.0 - state.beta1) * g;
      v.data[j] = state.beta2 * v.data[j] + (1.0 - state.beta2) * g * g;
      const double m_hat = m.data[j] / bc1;
      const double v_hat = v.data[j] / bc2;
      value.data[j] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
    grad.fill(0.0);
  }
}

void init_glorot(Tensor2& w, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(w.rows + w.cols));
  for (double& v : w.data) v = rng.uniform(-bound, bound);
}

// ---------------------------------------------------------------------------
// Dense / activations / loss

Tensor2 dense_forward(const Tensor2& x, const Tensor2& w, const Tensor2& b) {
  if (x.cols != w.rows) {
    throw std::invalid_argument("dense_forward: x [" + std::to_string(x.rows) + "x" +
                                std::to_string(x.cols) + "] does not conform with W [" +
                                std::to_string(w.rows) + "x" + std::to_string(w.cols) + "]");
  }
  require_shape(b, 1, w.cols, "dense_forward bias");
  Tensor2 y = matmul(x, w);
  for (std::size_t i = 0; i < y.rows; ++i) {
    double* yi = y.row(i);
    for (std::size_t j = 0; j < y.cols; ++j) yi[j] += b.data[j];
  }
  return y;
}

DenseGrads dense_backward(const Tensor2& x, const Tensor2& w, const Tensor2& dy) {
  if (dy.rows != x.rows || dy.cols != w.cols || x.cols != w.rows) {
    throw std::invalid_argument("dense_backward: inconsistent shapes");
  }
  DenseGrads g;
  g.dx = matmul_a_bt(dy, w);   // N x d_in
  g.dw = matmul_at_b(x, dy);   // d_in x d_out
  g.db = Tensor2(1, dy.cols);  // column sums
  for (std::size_t i = 0; i < dy.rows; ++i) {
    const double* di = dy.row(i);
    for (std::size_t j = 0; j < dy.cols; ++j) g.db.data[j] += di[j];
  }
  return g;
}

Tensor2 relu(const Tensor2& x) {
  Tensor2 y = x;
  for (double& v : y.data) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor2 relu_backward(const Tensor2& x, const Tensor2& dy) {
  if (!x.same_shape(dy)) throw std::invalid_argument("relu_backward: shape mismatch");
  Tensor2 dx = dy;
  for (std::size_t j = 0; j < dx.size(); ++j) {
    if (x.data[j] <= 0.0) dx.data[j] = 0.0;
  }
  return dx;
}

double sigmoid_scalar(double x) {
  double p;
  if (x >= 0.0) {
    p = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    p = e / (1.0 + e);
  }
  // keep the output strictly inside (0, 1) even where exp saturates
  constexpr double hi = 1.0 - 0x1p-53;
  constexpr double lo = 1e-300;
  return std::min(hi, std::max(lo, p));
}

Tensor2 sigmoid(const Tensor2& x) {
  Tensor2 y = x;
  for (double& v : y.data) v = sigmoid_scalar(v);
  return y;
}

Tensor2 sigmoid_backward_from_output(const Tensor2& p, const Tensor2& dy) {
  if (!p.same_shape(dy)) throw std::invalid_argument("sigmoid_backward: shape mismatch");
  Tensor2 dx = dy;
  for (std::size_t j = 0; j < dx.size(); ++j) {
    dx.data[j] *= p.data[j] * (1.0 - p.data[j]);
  }
  return dx;
}

BceResult bce_loss(const Tensor2& p, const Tensor2& y) {
  if (!p.same_shape(y)) throw std::invalid_argument("bce_loss: shape mismatch");
  constexpr double clamp = 1e-12;
  const double n = static_cast<double>(p.size());
  BceResult r;
  r.dp = Tensor2(p.rows, p.cols);
  double loss = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double pc = std::min(1.0 - clamp, std::max(clamp, p.data[j]));
    const double label = y.data[j];
    loss -= label * std::log(pc) + (1.0 - label) * std::log(1.0 - pc);
    r.dp.data[j] = (-label / pc + (1.0 - label) / (1.0 - pc)) / n;
  }
  r.loss = loss / n;
  return r;
}

// ---------------------------------------------------------------------------
// Conditional batch normalization

void CbnStats::init(std::size_t features) {
  mean = Tensor2(1, features, 0.0);
  var = Tensor2(1, features, 1.0);
  initialized = true;
}

Tensor2 cbn_forward(const Tensor2& f_in, const Tensor2& c, const Tensor2& gamma_w,
                    const Tensor2& gamma_b, const Tensor2& beta_w, const Tensor2& beta_b,
                    CbnStats& stats, Mode mode, CbnCache* cache, double eps) {
  const std::size_t n = f_in.rows;
  const std::size_t features = f_in.cols;
  require_shape(c, 1, gamma_w.rows, "cbn latent");
  require_shape(gamma_b, 1, features, "cbn gamma bias");
  require_shape(beta_b, 1, features, "cbn beta bias");
  if (gamma_w.cols != features || beta_w.cols != features) {
    throw std::invalid_argument("cbn_forward: conditioning map output dim != feature dim");
  }
  if (mode == Mode::kTrain && n < 2) {
    throw std::invalid_argument("cbn_forward: train mode needs at least 2 rows");
  }
  if (mode == Mode::kEval && !stats.initialized) {
    throw std::invalid_argument("cbn_forward: eval mode before running stats exist");
  }

  const Tensor2 gamma = dense_forward(c, gamma_w, gamma_b);  // 1 x F
  const Tensor2 beta = dense_forward(c, beta_w, beta_b);     // 1 x F

  Tensor2 mean(1, features), var(1, features);
  if (mode == Mode::kTrain) {
    for (std::size_t i = 0; i < n; ++i) {
      const double* xi = f_in.row(i);
      for (std::size_t f = 0; f < features; ++f) mean.data[f] += xi[f];
    }
    for (std::size_t f = 0; f < features; ++f) mean.data[f] /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double* xi = f_in.row(i);
      for (std::size_t f = 0; f < features; ++f) {
        const double d = xi[f] - mean.data[f];
        var.data[f] += d * d;
      }
    }
    for (std::size_t f = 0; f < features; ++f) var.data[f] /= static_cast<double>(n);

    if (!stats.initialized) stats.init(features);
    for (std::size_t f = 0; f < features; ++f) {
      stats.mean.data[f] = kCbnMomentum * stats.mean.data[f] + (1.0 - kCbnMomentum) * mean.data[f];
      stats.var.data[f] = kCbnMomentum * stats.var.data[f] + (1.0 - kCbnMomentum) * var.data[f];
    }
  } else {
    mean = stats.mean;
    var = stats.var;
  }

  Tensor2 inv_std(1, features);
  for (std::size_t f = 0; f < features; ++f) {
    inv_std.data[f] = 1.0 / std::sqrt(var.data[f] + eps);
  }

  Tensor2 out(n, features);
  Tensor2 x_hat(n, features);
  Tensor2 centered(n, features);
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = f_in.row(i);
    double* oi = out.row(i);
    double* hi = x_hat.row(i);
    double* ci = centered.row(i);
    for (std::size_t f = 0; f < features; ++f) {
      ci[f] = xi[f] - mean.data[f];
      hi[f] = ci[f] * inv_std.data[f];
      oi[f] = gamma.data[f] * hi[f] + beta.data[f];
    }
  }

  if (cache) {
    cache->x_hat = std::move(x_hat);
    cache->centered = std::move(centered);
    cache->inv_std = std::move(inv_std);
    cache->gamma = gamma;
    cache->c = c;
    cache->mean = std::move(mean);
    cache->var = std::move(var);
  }
  return out;
}

CbnGrads cbn_backward(const CbnCache& cache, const Tensor2& gamma_w, const Tensor2& beta_w,
                      const Tensor2& d_fout) {
  const std::size_t n = cache.x_hat.rows;
  const std::size_t features = cache.x_hat.cols;
  if (!d_fout.same_shape(cache.x_hat)) {
    throw std::invalid_argument("cbn_backward: gradient shape mismatch");
  }

  // Per-feature reductions.
  Tensor2 d_gamma(1, features), d_beta(1, features);
  for (std::size_t i = 0; i < n; ++i) {
    const double* di = d_fout.row(i);
    const double* hi = cache.x_hat.row(i);
    for (std::size_t f = 0; f < features; ++f) {
      d_gamma.data[f] += di[f] * hi[f];
      d_beta.data[f] += di[f];
    }
  }

  // Through the normalization, with mu and var functions of f_in:
  //   dx = (inv_std / n) * (n * dxh - sum(dxh) - x_hat * sum(dxh * x_hat))
  CbnGrads g;
  g.d_fin = Tensor2(n, features);
  Tensor2 sum_dxh(1, features), sum_dxh_xh(1, features);
  for (std::size_t i = 0; i < n; ++i) {
    const double* di = d_fout.row(i);
    const double* hi = cache.x_hat.row(i);
    for (std::size_t f = 0; f < features; ++f) {
      const double dxh = di[f] * cache.gamma.data[f];
      sum_dxh.data[f] += dxh;
      sum_dxh_xh.data[f] += dxh * hi[f];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* di = d_fout.row(i);
    const double* hi = cache.x_hat.row(i);
    double* oi = g.d_fin.row(i);
    for (std::size_t f = 0; f < features; ++f) {
      const double dxh = di[f] * cache.gamma.data[f];
      oi[f] = cache.inv_std.data[f] *
              (dxh - inv_n * sum_dxh.data[f] - inv_n * hi[f] * sum_dxh_xh.data[f]);
    }
  }

  // Into the conditioning maps: gamma = c Wg + bg, beta = c Wb + bb.
  g.d_gamma_w = matmul_at_b(cache.c, d_gamma);  // L x F
  g.d_gamma_b = d_gamma;
  g.d_beta_w = matmul_at_b(cache.c, d_beta);
  g.d_beta_b = d_beta;
  g.d_c = matmul_a_bt(d_gamma, gamma_w);  // 1 x L
  const Tensor2 d_c_beta = matmul_a_bt(d_beta, beta_w);
  for (std::size_t j = 0; j < g.d_c.size(); ++j) g.d_c.data[j] += d_c_beta.data[j];
  return g;
}

}  // namespace ocfk

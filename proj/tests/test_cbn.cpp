#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fd_check.hpp"
#include "ocfk/nn.hpp"

using namespace ocfk;
using namespace ocfk::testutil;

namespace {

struct CbnFixture {
  std::size_t n, features, latent;
  Tensor2 f_in, c, gamma_w, gamma_b, beta_w, beta_b;

  CbnFixture(std::size_t n_, std::size_t f_, std::size_t l_, std::uint64_t seed)
      : n(n_), features(f_), latent(l_) {
    Rng rng(seed);
    f_in = random_tensor(n, features, rng);
    c = random_tensor(1, latent, rng);
    gamma_w = random_tensor(latent, features, rng, 0.4);
    gamma_b = random_tensor(1, features, rng, 0.4);
    beta_w = random_tensor(latent, features, rng, 0.4);
    beta_b = random_tensor(1, features, rng, 0.4);
  }

  Tensor2 forward(CbnStats& stats, Mode mode, CbnCache* cache) {
    return cbn_forward(f_in, c, gamma_w, gamma_b, beta_w, beta_b, stats, mode, cache);
  }
};

// Standardize columns exactly (mean 0, biased variance 1).
void standardize(Tensor2& x) {
  for (std::size_t f = 0; f < x.cols; ++f) {
    double mean = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) mean += x(i, f);
    mean /= static_cast<double>(x.rows);
    double var = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) {
      x(i, f) -= mean;
      var += x(i, f) * x(i, f);
    }
    var /= static_cast<double>(x.rows);
    const double inv = 1.0 / std::sqrt(var);
    for (std::size_t i = 0; i < x.rows; ++i) x(i, f) *= inv;
  }
}

}  // namespace

TEST_SUITE_BEGIN("cbn");

TEST_CASE("identity parameters reproduce standardized input up to 1/sqrt(1+eps)") {
  CbnFixture fx(16, 4, 3, 42);
  standardize(fx.f_in);
  fx.gamma_w.fill(0.0);
  fx.gamma_b.fill(1.0);
  fx.beta_w.fill(0.0);
  fx.beta_b.fill(0.0);

  CbnStats stats;
  const Tensor2 out = fx.forward(stats, Mode::kTrain, nullptr);
  const double factor = 1.0 / std::sqrt(1.0 + kCbnEpsilon);
  for (std::size_t j = 0; j < out.size(); ++j) {
    CHECK(out.data[j] == doctest::Approx(fx.f_in.data[j] * factor).epsilon(1e-9));
  }
}

TEST_CASE("zero gain: every row equals beta(c)") {
  CbnFixture fx(8, 5, 3, 43);
  fx.gamma_w.fill(0.0);
  fx.gamma_b.fill(0.0);

  CbnStats stats;
  const Tensor2 beta = dense_forward(fx.c, fx.beta_w, fx.beta_b);
  const Tensor2 out = fx.forward(stats, Mode::kTrain, nullptr);
  for (std::size_t i = 0; i < out.rows; ++i) {
    for (std::size_t f = 0; f < out.cols; ++f) {
      CHECK(out(i, f) == doctest::Approx(beta.data[f]).epsilon(1e-12));
    }
  }
}

TEST_CASE("train-mode normalized activations: mean 0, variance ~1") {
  // input variance is scaled up so the epsilon in the denominator cannot
  // push the normalized variance below the 1e-6 band
  CbnFixture fx(64, 6, 4, 44);
  for (double& v : fx.f_in.data) v *= 10.0;

  CbnStats stats;
  CbnCache cache;
  fx.forward(stats, Mode::kTrain, &cache);
  for (std::size_t f = 0; f < fx.features; ++f) {
    double mean = 0.0;
    for (std::size_t i = 0; i < fx.n; ++i) mean += cache.x_hat(i, f);
    mean /= static_cast<double>(fx.n);
    double var = 0.0;
    for (std::size_t i = 0; i < fx.n; ++i) {
      const double d = cache.x_hat(i, f) - mean;
      var += d * d;
    }
    var /= static_cast<double>(fx.n);
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(var - 1.0) < 1e-6);
  }
}

TEST_CASE("train mode with one row is an error") {
  CbnFixture fx(1, 3, 2, 45);
  CbnStats stats;
  CHECK_THROWS_AS(fx.forward(stats, Mode::kTrain, nullptr), std::invalid_argument);
}

TEST_CASE("eval mode before stats exist is an error") {
  CbnFixture fx(4, 3, 2, 46);
  CbnStats stats;
  CHECK_THROWS_AS(fx.forward(stats, Mode::kEval, nullptr), std::invalid_argument);
}

TEST_CASE("eval mode uses running statistics and is row-independent") {
  CbnFixture fx(32, 4, 3, 47);
  CbnStats stats;
  for (int i = 0; i < 20; ++i) fx.forward(stats, Mode::kTrain, nullptr);

  const Tensor2 full = fx.forward(stats, Mode::kEval, nullptr);
  // evaluating a single row alone gives bitwise the same value
  CbnFixture one = fx;
  one.f_in = Tensor2(2, fx.features);
  std::copy_n(fx.f_in.row(3), fx.features, one.f_in.row(0));
  std::copy_n(fx.f_in.row(7), fx.features, one.f_in.row(1));
  const Tensor2 pair = one.forward(stats, Mode::kEval, nullptr);
  for (std::size_t f = 0; f < fx.features; ++f) {
    CHECK(pair(0, f) == full(3, f));
    CHECK(pair(1, f) == full(7, f));
  }
}

TEST_CASE("all six gradients match central finite differences") {
  CbnFixture fx(8, 5, 4, 48);
  Rng rng(49);
  const Tensor2 weights = random_tensor(fx.n, fx.features, rng);

  auto loss = [&]() {
    CbnStats stats;
    const Tensor2 out =
        cbn_forward(fx.f_in, fx.c, fx.gamma_w, fx.gamma_b, fx.beta_w, fx.beta_b, stats,
                    Mode::kTrain, nullptr);
    double acc = 0.0;
    for (std::size_t j = 0; j < out.size(); ++j) acc += weights.data[j] * out.data[j];
    return acc;
  };

  CbnStats stats;
  CbnCache cache;
  fx.forward(stats, Mode::kTrain, &cache);
  const CbnGrads g = cbn_backward(cache, fx.gamma_w, fx.beta_w, weights);

  CHECK(fd_check_tensor(fx.f_in, g.d_fin, loss).max_rel < 1e-5);
  CHECK(fd_check_tensor(fx.gamma_w, g.d_gamma_w, loss).max_rel < 1e-5);
  CHECK(fd_check_tensor(fx.gamma_b, g.d_gamma_b, loss).max_rel < 1e-5);
  CHECK(fd_check_tensor(fx.beta_w, g.d_beta_w, loss).max_rel < 1e-5);
  CHECK(fd_check_tensor(fx.beta_b, g.d_beta_b, loss).max_rel < 1e-5);
  CHECK(fd_check_tensor(fx.c, g.d_c, loss).max_rel < 1e-5);
}

TEST_CASE("zero upstream gradient gives zero everywhere") {
  CbnFixture fx(6, 3, 2, 50);
  CbnStats stats;
  CbnCache cache;
  fx.forward(stats, Mode::kTrain, &cache);
  const CbnGrads g = cbn_backward(cache, fx.gamma_w, fx.beta_w, Tensor2(6, 3, 0.0));
  for (double v : g.d_fin.data) CHECK(v == 0.0);
  for (double v : g.d_gamma_w.data) CHECK(v == 0.0);
  for (double v : g.d_c.data) CHECK(v == 0.0);
}

TEST_CASE("two-row single-feature case matches the hand derivation") {
  // out_i = gamma * (x_i - mu)/sqrt(var + eps) + beta with
  // mu = (x1+x2)/2, var = (x1-x2)^2/4. For loss a1*out1 + a2*out2:
  //   dL/dx1 = gamma*(a1 - a2)*eps/(2*s^3), s = sqrt((x1-x2)^2/4 + eps)
  const double x1 = 0.8, x2 = -0.3, gamma = 1.7, beta = 0.4, a1 = 0.9, a2 = -0.5;
  Tensor2 f_in = Tensor2::from({{x1}, {x2}});
  Tensor2 c = Tensor2::from({{1.0}});
  Tensor2 gamma_w(1, 1, 0.0), beta_w(1, 1, 0.0);
  Tensor2 gamma_b = Tensor2::from({{gamma}});
  Tensor2 beta_b = Tensor2::from({{beta}});

  CbnStats stats;
  CbnCache cache;
  cbn_forward(f_in, c, gamma_w, gamma_b, beta_w, beta_b, stats, Mode::kTrain, &cache);
  const Tensor2 upstream = Tensor2::from({{a1}, {a2}});
  const CbnGrads g = cbn_backward(cache, gamma_w, beta_w, upstream);

  const double s = std::sqrt((x1 - x2) * (x1 - x2) / 4.0 + kCbnEpsilon);
  const double expected = gamma * (a1 - a2) * kCbnEpsilon / (2.0 * s * s * s);
  CHECK(g.d_fin(0, 0) == doctest::Approx(expected).epsilon(1e-10));
  CHECK(g.d_fin(1, 0) == doctest::Approx(-expected).epsilon(1e-10));
}

TEST_CASE("running statistics update with momentum 0.9") {
  CbnFixture fx(16, 2, 2, 51);
  CbnStats stats;
  CbnCache cache;
  fx.forward(stats, Mode::kTrain, &cache);
  // fresh stats start at mean 0, var 1
  for (std::size_t f = 0; f < 2; ++f) {
    CHECK(stats.mean.data[f] ==
          doctest::Approx(0.1 * cache.mean.data[f]).epsilon(1e-12));
    CHECK(stats.var.data[f] ==
          doctest::Approx(0.9 + 0.1 * cache.var.data[f]).epsilon(1e-12));
  }
}

TEST_SUITE_END();

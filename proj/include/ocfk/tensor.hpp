#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace ocfk {

// Dense row-major f64 matrix. The whole training stack runs on these.
struct Tensor2 {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Tensor2() = default;
  Tensor2(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }

  std::size_t size() const { return data.size(); }
  bool same_shape(const Tensor2& o) const { return rows == o.rows && cols == o.cols; }
  void fill(double v) { std::fill(data.begin(), data.end(), v); }
  bool all_finite() const;

  static Tensor2 from(std::initializer_list<std::initializer_list<double>> rows);
};

// y = a * b
Tensor2 matmul(const Tensor2& a, const Tensor2& b);
void matmul_into(const Tensor2& a, const Tensor2& b, Tensor2& out);

// y = aᵀ * b  (used for weight gradients: dW = xᵀ dy)
Tensor2 matmul_at_b(const Tensor2& a, const Tensor2& b);
// y = a * bᵀ  (used for input gradients: dx = dy Wᵀ)
Tensor2 matmul_a_bt(const Tensor2& a, const Tensor2& b);

Tensor2 transpose(const Tensor2& a);

void require_shape(const Tensor2& t, std::size_t rows, std::size_t cols, const char* what);

}  // namespace ocfk

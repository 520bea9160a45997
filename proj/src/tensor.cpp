#include "ocfk/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ocfk {

namespace {
[[noreturn]] void shape_error(const char* op, const Tensor2& a, const Tensor2& b) {
  throw std::invalid_argument(std::string(op) + ": shapes [" + std::to_string(a.rows) + "x" +
                              std::to_string(a.cols) + "] and [" + std::to_string(b.rows) + "x" +
                              std::to_string(b.cols) + "] do not conform");
}
}  // namespace

bool Tensor2::all_finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Tensor2 Tensor2::from(std::initializer_list<std::initializer_list<double>> init) {
  Tensor2 t(init.size(), init.size() ? init.begin()->size() : 0);
  std::size_t i = 0;
  for (const auto& row : init) {
    if (row.size() != t.cols) throw std::invalid_argument("Tensor2::from: ragged rows");
    std::size_t j = 0;
    for (double v : row) t(i, j++) = v;
    ++i;
  }
  return t;
}

void matmul_into(const Tensor2& a, const Tensor2& b, Tensor2& out) {
  if (a.cols != b.rows) shape_error("matmul", a, b);
  out.rows = a.rows;
  out.cols = b.cols;
  out.data.assign(a.rows * b.cols, 0.0);
  const std::size_t n = a.rows, k = a.cols, m = b.cols;
  for (std::size_t i = 0; i < n; ++i) {
    double* oi = out.data.data() + i * m;
    const double* ai = a.data.data() + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ai[p];
      const double* bp = b.data.data() + p * m;
      for (std::size_t j = 0; j < m; ++j) oi[j] += av * bp[j];
    }
  }
}

Tensor2 matmul(const Tensor2& a, const Tensor2& b) {
  Tensor2 out;
  matmul_into(a, b, out);
  return out;
}

Tensor2 matmul_at_b(const Tensor2& a, const Tensor2& b) {
  if (a.rows != b.rows) shape_error("matmul_at_b", a, b);
  Tensor2 out(a.cols, b.cols, 0.0);
  const std::size_t n = a.rows, k = a.cols, m = b.cols;
  for (std::size_t i = 0; i < n; ++i) {
    const double* ai = a.data.data() + i * k;
    const double* bi = b.data.data() + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ai[p];
      double* op = out.data.data() + p * m;
      for (std::size_t j = 0; j < m; ++j) op[j] += av * bi[j];
    }
  }
  return out;
}

Tensor2 matmul_a_bt(const Tensor2& a, const Tensor2& b) {
  if (a.cols != b.cols) shape_error("matmul_a_bt", a, b);
  // materialize bᵀ so the inner loop stays contiguous
  return matmul(a, transpose(b));
}

Tensor2 transpose(const Tensor2& a) {
  Tensor2 out(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < a.cols; ++j) out(j, i) = a(i, j);
  }
  return out;
}

void require_shape(const Tensor2& t, std::size_t rows, std::size_t cols, const char* what) {
  if (t.rows != rows || t.cols != cols) {
    throw std::invalid_argument(std::string(what) + ": expected [" + std::to_string(rows) + "x" +
                                std::to_string(cols) + "], got [" + std::to_string(t.rows) + "x" +
                                std::to_string(t.cols) + "]");
  }
}

}  // namespace ocfk

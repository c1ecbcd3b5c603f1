// Copyright 2026 the dvsdr authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dvsdr/core/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "dvsdr/core/errors.hpp"
#include "dvsdr/simd/kernels.hpp"

namespace dvsdr {
namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shapes " + a.shape_string() + " and " +
                     b.shape_string() + " differ");
  }
}

[[noreturn]] void product_mismatch(const Matrix& a, const Matrix& b, const char* op) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + a.shape_string() + " and " +
                   b.shape_string());
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows * cols) {
    throw ShapeError("Matrix: " + std::to_string(data_.size()) + " values for shape " +
                     shape_string());
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("Matrix: ragged initializer list");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::string Matrix::shape_string() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) product_mismatch(a, b, "matmul");
  Matrix c(a.rows(), b.cols());
  simd::active().gemm(a.rows(), b.cols(), a.cols(), a.data(), a.cols(), b.data(), b.cols(),
                      c.data(), c.cols());
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) product_mismatch(a, b, "matmul_nt");
  return matmul(a, transpose(b));
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) product_mismatch(a, b, "matmul_tn");
  return matmul(transpose(a), b);
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  constexpr std::size_t kBlock = 32;
  for (std::size_t i0 = 0; i0 < a.rows(); i0 += kBlock) {
    for (std::size_t j0 = 0; j0 < a.cols(); j0 += kBlock) {
      const std::size_t i1 = std::min(a.rows(), i0 + kBlock);
      const std::size_t j1 = std::min(a.cols(), j0 + kBlock);
      for (std::size_t i = i0; i < i1; ++i) {
        for (std::size_t j = j0; j < j1; ++j) t(j, i) = a(i, j);
      }
    }
  }
  return t;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  Matrix out = a;
  add_scaled(out, 1.0, b);
  return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  Matrix out = a;
  add_scaled(out, -1.0, b);
  return out;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix out = a;
  for (double& v : out.values()) v *= s;
  return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  Matrix out = a;
  auto ov = out.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] *= bv[i];
  return out;
}

void add_scaled(Matrix& a, double alpha, const Matrix& b) {
  require_same_shape(a, b, "add_scaled");
  simd::active().axpy(a.size(), alpha, b.data(), a.data());
}

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> indices) {
  Matrix out(indices.size(), m.cols());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= m.rows()) {
      throw ShapeError("gather_rows: row " + std::to_string(indices[r]) + " out of range for " +
                       m.shape_string());
    }
    const auto src = m.row(indices[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

Matrix column_slice(const Matrix& m, std::size_t first, std::size_t count) {
  if (first + count > m.cols()) {
    throw ShapeError("column_slice: columns [" + std::to_string(first) + ", " +
                     std::to_string(first + count) + ") exceed " + m.shape_string());
  }
  Matrix out(m.rows(), count);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto src = m.row(r).subspan(first, count);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

bool all_finite(const Matrix& m) noexcept {
  return std::all_of(m.values().begin(), m.values().end(),
                     [](double v) { return std::isfinite(v); });
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
  }
  return worst;
}

}  // namespace dvsdr

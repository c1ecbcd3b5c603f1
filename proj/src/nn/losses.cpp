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

#include "dvsdr/nn/losses.hpp"

#include <algorithm>
#include <cmath>

#include "dvsdr/core/errors.hpp"
#include "dvsdr/core/reduce.hpp"
#include "dvsdr/nn/layers.hpp"

namespace dvsdr::nn {

Matrix softmax(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto in = logits.row(r);
    const double norm = logsumexp(in);
    auto out = p.row(r);
    for (std::size_t c = 0; c < in.size(); ++c) out[c] = std::exp(in[c] - norm);
  }
  return p;
}

LossAndGrad softmax_cross_entropy(const Matrix& logits, std::span<const int> labels) {
  if (labels.size() != logits.rows()) {
    throw ShapeError("softmax_cross_entropy: " + std::to_string(labels.size()) +
                     " labels for logits " + logits.shape_string());
  }
  const auto classes = static_cast<int>(logits.cols());
  for (int y : labels) {
    if (y < 0 || y >= classes) {
      throw DomainError("softmax_cross_entropy: label " + std::to_string(y) +
                        " outside [0, " + std::to_string(classes) + ")");
    }
  }
  LossAndGrad out{0.0, Matrix(logits.rows(), logits.cols())};
  if (logits.rows() == 0) return out;
  const double inv_batch = 1.0 / static_cast<double>(logits.rows());
  double total = 0.0;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto in = logits.row(r);
    const auto y = static_cast<std::size_t>(labels[r]);
    // loss = (max - in[y]) + log1p(sum of the other exp terms); exact for tiny losses
    const auto top = std::max_element(in.begin(), in.end());
    double rest = 0.0;
    for (auto it = in.begin(); it != in.end(); ++it) {
      if (it != top) rest += std::exp(*it - *top);
    }
    const double norm = *top + std::log1p(rest);
    total += (*top - in[y]) + std::log1p(rest);
    auto g = out.d_logits.row(r);
    for (std::size_t c = 0; c < in.size(); ++c) g[c] = std::exp(in[c] - norm) * inv_batch;
    g[y] -= inv_batch;
  }
  out.loss = total * inv_batch;
  return out;
}

double softplus(double x) noexcept {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

LossAndGrad bernoulli_nll(const Matrix& logits, const Matrix& targets) {
  if (logits.rows() != targets.rows() || logits.cols() != targets.cols()) {
    throw ShapeError("bernoulli_nll: logits " + logits.shape_string() + " vs targets " +
                     targets.shape_string());
  }
  for (double t : targets.values()) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw DomainError("bernoulli_nll: target " + std::to_string(t) + " outside [0, 1]");
    }
  }
  LossAndGrad out{0.0, Matrix(logits.rows(), logits.cols())};
  if (logits.rows() == 0) return out;
  const double inv_batch = 1.0 / static_cast<double>(logits.rows());
  const auto l = logits.values();
  const auto t = targets.values();
  auto g = out.d_logits.values();
  double total = 0.0;
  for (std::size_t i = 0; i < l.size(); ++i) {
    total += t[i] * softplus(-l[i]) + (1.0 - t[i]) * softplus(l[i]);
    g[i] = (sigmoid(l[i]) - t[i]) * inv_batch;
  }
  out.loss = total * inv_batch;
  return out;
}

}  // namespace dvsdr::nn

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

#pragma once

#include <span>

#include "dvsdr/core/matrix.hpp"

namespace dvsdr::nn {

/// Batch-mean loss together with its gradient w.r.t. the logits.
struct LossAndGrad {
  double loss = 0.0;
  Matrix d_logits;
};

/// Row-wise softmax, max-shifted.
Matrix softmax(const Matrix& logits);

/// mean_b -log softmax(logits_b)[label_b]; gradient (softmax - onehot) / batch.
/// Throws DomainError for a label outside [0, cols).
LossAndGrad softmax_cross_entropy(const Matrix& logits, std::span<const int> labels);

double softplus(double x) noexcept;

/// Binary cross-entropy on logits against gray targets in [0, 1]:
/// mean_b sum_j softplus(l) - t l; gradient (sigmoid(l) - t) / batch.
LossAndGrad bernoulli_nll(const Matrix& logits, const Matrix& targets);

}  // namespace dvsdr::nn

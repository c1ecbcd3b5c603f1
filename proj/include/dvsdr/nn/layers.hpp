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

#include <functional>

#include "dvsdr/core/matrix.hpp"

namespace dvsdr::nn {

/// y = W x + b applied row-wise. W is out x in.
struct AffineLayer {
  Matrix weight;
  Vector bias;

  std::size_t in_dim() const noexcept { return weight.cols(); }
  std::size_t out_dim() const noexcept { return weight.rows(); }
};

struct LayerGrads {
  Matrix d_weight;  // out x in
  Vector d_bias;    // out
  Matrix d_input;   // batch x in; empty when not requested
};

Matrix affine_forward(const AffineLayer& layer, const Matrix& x);

/// dW = upstream^T x, db = column sums of upstream, dX = upstream W.
/// The input gradient is skipped when `need_input_grad` is false.
LayerGrads affine_backward(const AffineLayer& layer, const Matrix& x, const Matrix& upstream,
                           bool need_input_grad = true);

enum class Activation { relu, sigmoid };

double sigmoid(double x) noexcept;
Matrix sigmoid(const Matrix& x);

Matrix activation_forward(Activation kind, const Matrix& x);

/// Gradient w.r.t. the activation input `x`, given the upstream gradient.
Matrix activation_backward(Activation kind, const Matrix& x, const Matrix& upstream);

struct Activated {
  Matrix output;
  std::function<Matrix(const Matrix&)> backward;
};

/// Forward pass plus a closure mapping upstream gradients to input gradients.
Activated activate(Activation kind, const Matrix& x);

}  // namespace dvsdr::nn

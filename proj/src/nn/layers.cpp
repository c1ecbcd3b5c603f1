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

#include "dvsdr/nn/layers.hpp"

#include <cmath>

#include "dvsdr/core/errors.hpp"
#include "dvsdr/simd/kernels.hpp"

namespace dvsdr::nn {

Matrix affine_forward(const AffineLayer& layer, const Matrix& x) {
  if (x.cols() != layer.in_dim()) {
    throw ShapeError("affine_forward: input " + x.shape_string() + " does not match weight " +
                     layer.weight.shape_string());
  }
  Matrix y = matmul_nt(x, layer.weight);
  const auto& k = simd::active();
  for (std::size_t r = 0; r < y.rows(); ++r) k.axpy(y.cols(), 1.0, layer.bias.data(), y.row(r).data());
  return y;
}

LayerGrads affine_backward(const AffineLayer& layer, const Matrix& x, const Matrix& upstream,
                           bool need_input_grad) {
  if (x.cols() != layer.in_dim() || upstream.cols() != layer.out_dim() ||
      x.rows() != upstream.rows()) {
    throw ShapeError("affine_backward: input " + x.shape_string() + ", upstream " +
                     upstream.shape_string() + ", weight " + layer.weight.shape_string());
  }
  LayerGrads g;
  g.d_weight = matmul_tn(upstream, x);
  g.d_bias.assign(layer.out_dim(), 0.0);
  const auto& k = simd::active();
  for (std::size_t r = 0; r < upstream.rows(); ++r) {
    k.axpy(upstream.cols(), 1.0, upstream.row(r).data(), g.d_bias.data());
  }
  if (need_input_grad) g.d_input = matmul(upstream, layer.weight);
  return g;
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Matrix sigmoid(const Matrix& x) {
  Matrix y = x;
  for (double& v : y.values()) v = sigmoid(v);
  return y;
}

Matrix activation_forward(Activation kind, const Matrix& x) {
  switch (kind) {
    case Activation::relu: {
      Matrix y(x.rows(), x.cols());
      simd::active().relu(x.size(), x.data(), y.data());
      return y;
    }
    case Activation::sigmoid:
      return sigmoid(x);
  }
  return x;
}

Matrix activation_backward(Activation kind, const Matrix& x, const Matrix& upstream) {
  if (x.rows() != upstream.rows() || x.cols() != upstream.cols()) {
    throw ShapeError("activation_backward: input " + x.shape_string() + " vs upstream " +
                     upstream.shape_string());
  }
  Matrix dx(x.rows(), x.cols());
  switch (kind) {
    case Activation::relu:
      simd::active().relu_backward(x.size(), x.data(), upstream.data(), dx.data());
      break;
    case Activation::sigmoid:
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double s = sigmoid(x.values()[i]);
        dx.values()[i] = upstream.values()[i] * s * (1.0 - s);
      }
      break;
  }
  return dx;
}

Activated activate(Activation kind, const Matrix& x) {
  return {activation_forward(kind, x),
          [kind, x](const Matrix& upstream) { return activation_backward(kind, x, upstream); }};
}

}  // namespace dvsdr::nn

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

#include <cstddef>
#include <span>
#include <vector>

#include "dvsdr/core/matrix.hpp"
#include "dvsdr/core/rng.hpp"
#include "dvsdr/nn/layers.hpp"

namespace dvsdr::model {

/// Network sizes. Hidden lists give the widths of the ReLU layers between the
/// input and the output head of each network.
struct ModelConfig {
  std::size_t input_dim = 784;
  std::size_t latent_dim = 15;
  std::size_t class_count = 10;
  std::vector<std::size_t> encoder_hidden{512, 512};
  std::vector<std::size_t> decoder_hidden{512, 512};
  std::vector<std::size_t> classifier_hidden{256};

  /// Throws DomainError unless every size is >= 1 and latent_dim < input_dim.
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

/// Stack of affine layers with ReLU between them; the last layer is linear.
struct Mlp {
  std::vector<nn::AffineLayer> layers;
};

/// Intermediate values kept by a forward pass for the backward pass.
struct MlpTrace {
  std::vector<Matrix> inputs;           // input of each layer
  std::vector<Matrix> pre_activations;  // output of each hidden affine layer, before ReLU
};

Matrix mlp_forward(const Mlp& net, const Matrix& x, MlpTrace* trace = nullptr);

/// Writes parameter gradients into `grads` (same shape as `net`) and returns the
/// input gradient, or an empty matrix when `need_input_grad` is false.
Matrix mlp_backward(const Mlp& net, const MlpTrace& trace, const Matrix& upstream, Mlp& grads,
                    bool need_input_grad);

/// Encoder, decoder and classifier parameters. Also used for gradients and
/// optimizer moments, which mirror the parameter shapes.
struct NetworkParams {
  Mlp encoder;     // x -> [mu | logvar], 2 * latent_dim outputs
  Mlp decoder;     // z -> pixel logits
  Mlp classifier;  // z -> class logits
};

using ParamGrads = NetworkParams;

struct DvsdrModel {
  ModelConfig config;
  NetworkParams params;
};

/// q(z|x) for a batch.
struct DiagonalGaussian {
  Matrix mu;
  Matrix logvar;
};

/// He-initialized weights N(0, 2 / fan_in), zero biases. Deterministic in `rng`.
DvsdrModel init_model(const ModelConfig& config, Rng& rng);

NetworkParams zeros_like(const NetworkParams& params);

/// Flat views of every weight matrix and bias vector in the fixed order
/// encoder, decoder, classifier; within a network layer by layer, weight then bias.
std::vector<std::span<double>> param_blocks(NetworkParams& params);
std::vector<std::span<const double>> param_blocks(const NetworkParams& params);

std::size_t parameter_count(const NetworkParams& params);

/// a += b for shape-identical parameter sets.
void add_in_place(NetworkParams& a, const NetworkParams& b);

DiagonalGaussian encode(const DvsdrModel& model, const Matrix& x);
Matrix decode(const DvsdrModel& model, const Matrix& z);
Matrix classify(const DvsdrModel& model, const Matrix& z);

/// Posterior mean embedding.
Matrix embed(const DvsdrModel& model, const Matrix& x);

}  // namespace dvsdr::model

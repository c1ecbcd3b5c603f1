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

#include "dvsdr/model/model.hpp"

#include <cmath>

#include "dvsdr/core/errors.hpp"
#include "dvsdr/nn/gaussian.hpp"

namespace dvsdr::model {
namespace {

Mlp make_mlp(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out, Rng& rng) {
  Mlp net;
  std::size_t fan_in = in;
  auto add_layer = [&](std::size_t width) {
    nn::AffineLayer layer{Matrix(width, fan_in), Vector(width, 0.0)};
    const double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (double& w : layer.weight.values()) w = scale * rng.normal();
    net.layers.push_back(std::move(layer));
    fan_in = width;
  };
  for (std::size_t width : hidden) add_layer(width);
  add_layer(out);
  return net;
}

Mlp zeros_like(const Mlp& net) {
  Mlp out;
  out.layers.reserve(net.layers.size());
  for (const auto& l : net.layers) {
    out.layers.push_back({Matrix(l.weight.rows(), l.weight.cols()), Vector(l.bias.size(), 0.0)});
  }
  return out;
}

template <typename Params, typename Span>
std::vector<Span> blocks_of(Params& params) {
  std::vector<Span> out;
  for (auto* net : {&params.encoder, &params.decoder, &params.classifier}) {
    for (auto& layer : net->layers) {
      out.emplace_back(layer.weight.values());
      out.emplace_back(layer.bias);
    }
  }
  return out;
}

void require_cols(const Matrix& m, std::size_t cols, const char* op) {
  if (m.cols() != cols) {
    throw ShapeError(std::string(op) + ": expected " + std::to_string(cols) + " columns, got " +
                     m.shape_string());
  }
}

}  // namespace

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v < 1) throw DomainError(std::string("model config: ") + name + " must be >= 1");
  };
  positive(input_dim, "input_dim");
  positive(latent_dim, "latent_dim");
  if (class_count < 2) throw DomainError("model config: class_count must be >= 2");
  for (auto w : encoder_hidden) positive(w, "encoder hidden width");
  for (auto w : decoder_hidden) positive(w, "decoder hidden width");
  for (auto w : classifier_hidden) positive(w, "classifier hidden width");
  if (latent_dim >= input_dim) {
    throw DomainError("model config: latent_dim " + std::to_string(latent_dim) +
                      " must be smaller than input_dim " + std::to_string(input_dim));
  }
}

Matrix mlp_forward(const Mlp& net, const Matrix& x, MlpTrace* trace) {
  if (trace != nullptr) {
    trace->inputs.clear();
    trace->pre_activations.clear();
  }
  Matrix h = x;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    Matrix pre = nn::affine_forward(net.layers[l], h);
    const bool last = l + 1 == net.layers.size();
    if (trace != nullptr) trace->inputs.push_back(std::move(h));
    if (last) return pre;
    h = nn::activation_forward(nn::Activation::relu, pre);
    if (trace != nullptr) trace->pre_activations.push_back(std::move(pre));
  }
  return h;
}

Matrix mlp_backward(const Mlp& net, const MlpTrace& trace, const Matrix& upstream, Mlp& grads,
                    bool need_input_grad) {
  Matrix g = upstream;
  for (std::size_t l = net.layers.size(); l-- > 0;) {
    nn::LayerGrads lg =
        nn::affine_backward(net.layers[l], trace.inputs[l], g, l > 0 || need_input_grad);
    grads.layers[l].weight = std::move(lg.d_weight);
    grads.layers[l].bias = std::move(lg.d_bias);
    if (l > 0) {
      g = nn::activation_backward(nn::Activation::relu, trace.pre_activations[l - 1], lg.d_input);
    } else {
      g = std::move(lg.d_input);
    }
  }
  return g;
}

DvsdrModel init_model(const ModelConfig& config, Rng& rng) {
  config.validate();
  DvsdrModel m{config, {}};
  m.params.encoder = make_mlp(config.input_dim, config.encoder_hidden, 2 * config.latent_dim, rng);
  m.params.decoder = make_mlp(config.latent_dim, config.decoder_hidden, config.input_dim, rng);
  m.params.classifier =
      make_mlp(config.latent_dim, config.classifier_hidden, config.class_count, rng);
  return m;
}

NetworkParams zeros_like(const NetworkParams& params) {
  return {zeros_like(params.encoder), zeros_like(params.decoder), zeros_like(params.classifier)};
}

std::vector<std::span<double>> param_blocks(NetworkParams& params) {
  return blocks_of<NetworkParams, std::span<double>>(params);
}

std::vector<std::span<const double>> param_blocks(const NetworkParams& params) {
  return blocks_of<const NetworkParams, std::span<const double>>(params);
}

std::size_t parameter_count(const NetworkParams& params) {
  std::size_t n = 0;
  for (auto b : param_blocks(params)) n += b.size();
  return n;
}

void add_in_place(NetworkParams& a, const NetworkParams& b) {
  auto dst = param_blocks(a);
  const auto src = param_blocks(b);
  if (dst.size() != src.size()) throw ShapeError("add_in_place: parameter sets differ in layout");
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (dst[i].size() != src[i].size()) {
      throw ShapeError("add_in_place: block " + std::to_string(i) + " sizes differ");
    }
    for (std::size_t j = 0; j < dst[i].size(); ++j) dst[i][j] += src[i][j];
  }
}

DiagonalGaussian encode(const DvsdrModel& model, const Matrix& x) {
  require_cols(x, model.config.input_dim, "encode");
  const Matrix head = mlp_forward(model.params.encoder, x);
  const std::size_t d = model.config.latent_dim;
  return {column_slice(head, 0, d), nn::clamp_logvar(column_slice(head, d, d))};
}

Matrix decode(const DvsdrModel& model, const Matrix& z) {
  require_cols(z, model.config.latent_dim, "decode");
  return mlp_forward(model.params.decoder, z);
}

Matrix classify(const DvsdrModel& model, const Matrix& z) {
  require_cols(z, model.config.latent_dim, "classify");
  return mlp_forward(model.params.classifier, z);
}

Matrix embed(const DvsdrModel& model, const Matrix& x) { return encode(model, x).mu; }

}  // namespace dvsdr::model

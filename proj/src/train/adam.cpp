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

#include "dvsdr/train/adam.hpp"

#include <cmath>

#include "dvsdr/core/errors.hpp"
#include "dvsdr/simd/kernels.hpp"

namespace dvsdr::train {

AdamState make_adam_state(std::span<const std::size_t> block_sizes, const AdamConfig& config) {
  AdamState s{config, 0, {}, {}};
  for (std::size_t n : block_sizes) {
    s.first_moment.emplace_back(n, 0.0);
    s.second_moment.emplace_back(n, 0.0);
  }
  return s;
}

AdamState make_adam_state(const model::NetworkParams& params, const AdamConfig& config) {
  std::vector<std::size_t> sizes;
  for (auto b : model::param_blocks(params)) sizes.push_back(b.size());
  return make_adam_state(sizes, config);
}

void adam_step(std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw ShapeError("adam_step: " + std::to_string(params.size()) + " parameter blocks, " +
                     std::to_string(grads.size()) + " gradient blocks, " +
                     std::to_string(state.first_moment.size()) + " moment blocks");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].size() != grads[i].size() || params[i].size() != state.first_moment[i].size()) {
      throw ShapeError("adam_step: block " + std::to_string(i) + " size mismatch");
    }
  }
  ++state.t;
  const auto t = static_cast<double>(state.t);
  const AdamConfig& c = state.config;
  const simd::AdamCoefficients coeffs{c.lr,      c.beta1, c.beta2, c.epsilon,
                                      1.0 - std::pow(c.beta1, t), 1.0 - std::pow(c.beta2, t)};
  const auto& k = simd::active();
  for (std::size_t i = 0; i < params.size(); ++i) {
    k.adam_update(params[i].size(), params[i].data(), grads[i].data(),
                  state.first_moment[i].data(), state.second_moment[i].data(), coeffs);
  }
}

void adam_step(model::NetworkParams& params, const model::ParamGrads& grads, AdamState& state) {
  const auto p = model::param_blocks(params);
  const auto g = model::param_blocks(grads);
  adam_step(p, g, state);
}

}  // namespace dvsdr::train

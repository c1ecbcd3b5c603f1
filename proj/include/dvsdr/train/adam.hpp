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

#include <cstdint>
#include <span>
#include <vector>

#include "dvsdr/core/matrix.hpp"
#include "dvsdr/model/model.hpp"

namespace dvsdr::train {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  bool operator==(const AdamConfig&) const = default;
};

/// Moment accumulators, one flat vector per parameter block (see model::param_blocks).
struct AdamState {
  AdamConfig config;
  std::uint64_t t = 0;
  std::vector<Vector> first_moment;
  std::vector<Vector> second_moment;
};

AdamState make_adam_state(std::span<const std::size_t> block_sizes, const AdamConfig& config = {});
AdamState make_adam_state(const model::NetworkParams& params, const AdamConfig& config = {});

/// One bias-corrected Adam update over every block. Increments t first.
void adam_step(std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads, AdamState& state);
void adam_step(model::NetworkParams& params, const model::ParamGrads& grads, AdamState& state);

}  // namespace dvsdr::train

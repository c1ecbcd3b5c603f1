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
#include <filesystem>
#include <string>
#include <string_view>

#include "dvsdr/model/model.hpp"
#include "dvsdr/train/adam.hpp"

// Checkpoint layout, all integers little-endian:
//
//   bytes 0..6   magic "DVSDR1\0"
//   u32          header length H
//   H bytes      UTF-8 JSON header: format_version, model (config), adam
//                (lr, beta1, beta2, epsilon), t, seed, parameter_count
//   f64 blocks   parameters in model::param_blocks order
//                (encoder, decoder, classifier; per layer weight row-major then bias),
//                then Adam first moments, then Adam second moments, same order.

namespace dvsdr::train {

struct Checkpoint {
  model::DvsdrModel model;
  AdamState adam;
  std::uint64_t seed = 0;
};

std::string serialize_checkpoint(const model::DvsdrModel& model, const AdamState& adam,
                                 std::uint64_t seed);

/// Throws FormatError on bad magic, malformed header or wrong payload length, and
/// ConfigMismatchError when `expected` is given and differs from the stored config.
Checkpoint parse_checkpoint(std::string_view bytes, const model::ModelConfig* expected = nullptr);

/// Writes through a temporary file and renames it into place.
void save_checkpoint(const std::filesystem::path& path, const model::DvsdrModel& model,
                     const AdamState& adam, std::uint64_t seed);

Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const model::ModelConfig* expected = nullptr);

}  // namespace dvsdr::train

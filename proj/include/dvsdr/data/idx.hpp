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
#include <span>
#include <vector>

// IDX container: two zero bytes, a type byte (0x08 = unsigned byte), the
// number of dimensions, one big-endian u32 per dimension, then the payload.

namespace dvsdr::data {

inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;  // 1-D u8
inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;  // 3-D u8

struct IdxTensor {
  std::uint32_t magic = 0;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> payload;
};

/// Throws FormatError naming the byte offset on an unsupported magic, a
/// truncated or oversized payload, or a dimension product that overflows.
IdxTensor parse_idx(std::span<const std::uint8_t> bytes);
IdxTensor load_idx(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_idx(const IdxTensor& tensor);
void write_idx(const std::filesystem::path& path, const IdxTensor& tensor);

}  // namespace dvsdr::data

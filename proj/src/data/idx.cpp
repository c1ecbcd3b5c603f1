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

#include "dvsdr/data/idx.hpp"

#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "dvsdr/core/errors.hpp"

namespace dvsdr::data {
namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::string hex(std::uint32_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s = "0x";
  for (int shift = 28; shift >= 0; shift -= 4) s.push_back(kDigits[(v >> shift) & 0xF]);
  return s;
}

}  // namespace

IdxTensor parse_idx(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) {
    throw FormatError("idx: file of " + std::to_string(bytes.size()) +
                      " bytes is too short for a magic number (byte offset 0)");
  }
  IdxTensor t;
  t.magic = read_be32(bytes, 0);
  if (t.magic != kIdxLabelsMagic && t.magic != kIdxImagesMagic) {
    throw FormatError("idx: unsupported magic " + hex(t.magic) + " at byte offset 0");
  }
  const std::size_t ndims = t.magic & 0xFFu;
  const std::size_t header = 4 + 4 * ndims;
  if (bytes.size() < header) {
    throw FormatError("idx: header truncated at byte offset " + std::to_string(bytes.size()) +
                      ", need " + std::to_string(header) + " bytes");
  }
  std::size_t count = 1;
  for (std::size_t i = 0; i < ndims; ++i) {
    const std::uint32_t dim = read_be32(bytes, 4 + 4 * i);
    if (dim != 0 && count > std::numeric_limits<std::size_t>::max() / dim) {
      throw FormatError("idx: dimension product overflows at byte offset " +
                        std::to_string(4 + 4 * i));
    }
    count *= dim;
    t.dims.push_back(dim);
  }
  const std::size_t available = bytes.size() - header;
  if (available < count) {
    throw FormatError("idx: payload truncated at byte offset " + std::to_string(bytes.size()) +
                      ": expected " + std::to_string(count) + " bytes after offset " +
                      std::to_string(header));
  }
  if (available > count) {
    throw FormatError("idx: " + std::to_string(available - count) +
                      " unexpected trailing bytes at byte offset " + std::to_string(header + count));
  }
  t.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header), bytes.end());
  return t;
}

IdxTensor load_idx(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open IDX file " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  try {
    return parse_idx(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_idx(const IdxTensor& tensor) {
  std::vector<std::uint8_t> out;
  out.reserve(4 + 4 * tensor.dims.size() + tensor.payload.size());
  put_be32(out, tensor.magic);
  for (std::uint32_t d : tensor.dims) put_be32(out, d);
  out.insert(out.end(), tensor.payload.begin(), tensor.payload.end());
  return out;
}

void write_idx(const std::filesystem::path& path, const IdxTensor& tensor) {
  const auto bytes = encode_idx(tensor);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace dvsdr::data

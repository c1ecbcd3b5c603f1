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
#include <vector>

#include "dvsdr/core/matrix.hpp"

namespace dvsdr::eval {

inline constexpr std::size_t kGutter = 2;

/// Gray tiles laid out row-major on a rows x cols grid. Pixels in [0, 1].
struct ImageGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t tile_height = 28;
  std::size_t tile_width = 28;
  std::vector<Vector> tiles;
};

/// Tiles from the rows of `images`, each tile_height * tile_width pixels.
ImageGrid make_grid(const Matrix& images, std::size_t rows, std::size_t cols,
                    std::size_t tile_height = 28, std::size_t tile_width = 28);

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major
};

/// round(255 * v) after clamping v to [0, 1].
std::uint8_t quantize(double v) noexcept;

/// Tiles separated by 2-pixel white gutters, no outer border. Empty cells are white.
GrayImage render(const ImageGrid& grid);

/// Binary PGM: "P5 <width> <height> 255\n" followed by the raw bytes.
void write_pgm(const GrayImage& image, const std::filesystem::path& path);
GrayImage read_pgm(const std::filesystem::path& path);

void write_pgm_grid(const ImageGrid& grid, const std::filesystem::path& path);

}  // namespace dvsdr::eval

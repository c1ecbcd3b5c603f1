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

#include "dvsdr/eval/image_grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "dvsdr/core/errors.hpp"

namespace dvsdr::eval {

ImageGrid make_grid(const Matrix& images, std::size_t rows, std::size_t cols,
                    std::size_t tile_height, std::size_t tile_width) {
  if (images.cols() != tile_height * tile_width) {
    throw ShapeError("make_grid: images " + images.shape_string() + " are not " +
                     std::to_string(tile_height) + "x" + std::to_string(tile_width) + " tiles");
  }
  if (images.rows() > rows * cols) {
    throw ShapeError("make_grid: " + std::to_string(images.rows()) + " tiles do not fit a " +
                     std::to_string(rows) + "x" + std::to_string(cols) + " grid");
  }
  ImageGrid grid{rows, cols, tile_height, tile_width, {}};
  for (std::size_t i = 0; i < images.rows(); ++i) {
    grid.tiles.emplace_back(images.row(i).begin(), images.row(i).end());
  }
  return grid;
}

std::uint8_t quantize(double v) noexcept {
  return static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
}

GrayImage render(const ImageGrid& grid) {
  if (grid.tiles.size() > grid.rows * grid.cols) {
    throw ShapeError("render: grid holds more tiles than cells");
  }
  GrayImage img;
  img.width = grid.cols * grid.tile_width + (grid.cols > 0 ? (grid.cols - 1) * kGutter : 0);
  img.height = grid.rows * grid.tile_height + (grid.rows > 0 ? (grid.rows - 1) * kGutter : 0);
  img.pixels.assign(img.width * img.height, 255);
  for (std::size_t t = 0; t < grid.tiles.size(); ++t) {
    const Vector& tile = grid.tiles[t];
    if (tile.size() != grid.tile_height * grid.tile_width) {
      throw ShapeError("render: tile " + std::to_string(t) + " has " +
                       std::to_string(tile.size()) + " pixels");
    }
    const std::size_t top = (t / grid.cols) * (grid.tile_height + kGutter);
    const std::size_t left = (t % grid.cols) * (grid.tile_width + kGutter);
    for (std::size_t y = 0; y < grid.tile_height; ++y) {
      for (std::size_t x = 0; x < grid.tile_width; ++x) {
        img.pixels[(top + y) * img.width + left + x] = quantize(tile[y * grid.tile_width + x]);
      }
    }
  }
  return img;
}

void write_pgm(const GrayImage& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P5 " << image.width << ' ' << image.height << " 255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string magic;
  std::size_t maxval = 0;
  GrayImage img;
  in >> magic >> img.width >> img.height >> maxval;
  if (!in || magic != "P5" || maxval != 255) {
    throw FormatError(path.string() + ": not an 8-bit binary PGM");
  }
  in.get();  // single whitespace after maxval
  img.pixels.resize(img.width * img.height);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
    throw FormatError(path.string() + ": pixel data truncated");
  }
  return img;
}

void write_pgm_grid(const ImageGrid& grid, const std::filesystem::path& path) {
  write_pgm(render(grid), path);
}

}  // namespace dvsdr::eval

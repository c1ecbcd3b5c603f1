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
#include <string_view>
#include <vector>

#include "dvsdr/core/matrix.hpp"
#include "dvsdr/core/rng.hpp"
#include "dvsdr/data/idx.hpp"

namespace dvsdr::data {

/// Images in [0, 1], one flattened image per row, with labels and the
/// labeled/unlabeled split.
struct Dataset {
  Matrix images;
  std::vector<int> labels;
  std::vector<bool> labeled_mask;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t labeled_count() const noexcept;
};

/// Pixel bytes / 255, each image flattened row-major to one matrix row.
Matrix normalize(const IdxTensor& raw);

/// Images and labels from a pair of IDX files; every sample starts labeled.
Dataset load_dataset(const std::filesystem::path& images, const std::filesystem::path& labels,
                     std::size_t class_count = 10);

struct IdxPaths {
  std::filesystem::path images;
  std::filesystem::path labels;
};

/// Standard MNIST / Fashion-MNIST file names under `dir`; split is "train" or "test".
IdxPaths standard_paths(const std::filesystem::path& dir, std::string_view split);

/// Marks exactly n / class_count samples of each class as labeled, picked by a
/// seeded shuffle. n == size() labels everything.
Dataset subsample_labels(Dataset dataset, std::size_t n, std::uint64_t seed,
                         std::size_t class_count = 10);

/// Seeded permutation of `indices` cut into consecutive batches; the last batch may be short.
std::vector<std::vector<std::size_t>> minibatches(std::span<const std::size_t> indices,
                                                  std::size_t batch_size, Rng& rng);

/// Replaces each pixel with a Bernoulli(pixel) draw.
void binarize(Dataset& dataset, Rng& rng);

/// The first n samples.
Dataset head(const Dataset& dataset, std::size_t n);

}  // namespace dvsdr::data

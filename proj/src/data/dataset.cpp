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

#include "dvsdr/data/dataset.hpp"

#include <algorithm>
#include <numeric>

#include "dvsdr/core/errors.hpp"

namespace dvsdr::data {

std::size_t Dataset::labeled_count() const noexcept {
  return static_cast<std::size_t>(std::count(labeled_mask.begin(), labeled_mask.end(), true));
}

Matrix normalize(const IdxTensor& raw) {
  if (raw.dims.empty()) throw FormatError("normalize: tensor has no dimensions");
  const std::size_t n = raw.dims[0];
  std::size_t pixels = 1;
  for (std::size_t i = 1; i < raw.dims.size(); ++i) pixels *= raw.dims[i];
  std::vector<double> values(raw.payload.size());
  std::transform(raw.payload.begin(), raw.payload.end(), values.begin(),
                 [](std::uint8_t b) { return static_cast<double>(b) / 255.0; });
  return Matrix(n, pixels, std::move(values));
}

Dataset load_dataset(const std::filesystem::path& images, const std::filesystem::path& labels,
                     std::size_t class_count) {
  const IdxTensor img = load_idx(images);
  const IdxTensor lab = load_idx(labels);
  if (img.magic != kIdxImagesMagic) throw FormatError(images.string() + ": not an IDX image file");
  if (lab.magic != kIdxLabelsMagic) throw FormatError(labels.string() + ": not an IDX label file");
  if (img.dims[0] != lab.dims[0]) {
    throw FormatError(images.string() + " holds " + std::to_string(img.dims[0]) + " images but " +
                      labels.string() + " holds " + std::to_string(lab.dims[0]) + " labels");
  }
  Dataset ds;
  ds.images = normalize(img);
  ds.labels.reserve(lab.payload.size());
  for (std::size_t i = 0; i < lab.payload.size(); ++i) {
    if (lab.payload[i] >= class_count) {
      throw FormatError(labels.string() + ": label " + std::to_string(lab.payload[i]) +
                        " at byte offset " + std::to_string(8 + i) + " exceeds class count " +
                        std::to_string(class_count));
    }
    ds.labels.push_back(lab.payload[i]);
  }
  ds.labeled_mask.assign(ds.labels.size(), true);
  return ds;
}

IdxPaths standard_paths(const std::filesystem::path& dir, std::string_view split) {
  if (split == "train") return {dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte"};
  if (split == "test") return {dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte"};
  throw DomainError("unknown split '" + std::string(split) + "', expected train or test");
}

Dataset subsample_labels(Dataset dataset, std::size_t n, std::uint64_t seed,
                         std::size_t class_count) {
  const std::size_t total = dataset.size();
  if (n > total) {
    throw DomainError("subsample_labels: " + std::to_string(n) + " labels requested from " +
                      std::to_string(total) + " samples");
  }
  if (n == total) {
    dataset.labeled_mask.assign(total, true);
    return dataset;
  }
  if (class_count == 0 || n % class_count != 0) {
    throw DomainError("subsample_labels: " + std::to_string(n) + " is not divisible by " +
                      std::to_string(class_count) + " classes");
  }
  const std::size_t per_class = n / class_count;
  std::vector<std::vector<std::size_t>> by_class(class_count);
  for (std::size_t i = 0; i < total; ++i) {
    const auto y = static_cast<std::size_t>(dataset.labels[i]);
    if (y >= class_count) throw DomainError("subsample_labels: label out of range");
    by_class[y].push_back(i);
  }
  Rng rng(seed);
  dataset.labeled_mask.assign(total, false);
  for (std::size_t c = 0; c < class_count; ++c) {
    auto& members = by_class[c];
    if (members.size() < per_class) {
      throw DomainError("subsample_labels: class " + std::to_string(c) + " has " +
                        std::to_string(members.size()) + " samples, " +
                        std::to_string(per_class) + " needed");
    }
    rng.shuffle(std::span<std::size_t>(members));
    for (std::size_t i = 0; i < per_class; ++i) dataset.labeled_mask[members[i]] = true;
  }
  return dataset;
}

std::vector<std::vector<std::size_t>> minibatches(std::span<const std::size_t> indices,
                                                  std::size_t batch_size, Rng& rng) {
  if (batch_size == 0) throw DomainError("minibatches: batch_size must be >= 1");
  std::vector<std::size_t> order(indices.begin(), indices.end());
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

void binarize(Dataset& dataset, Rng& rng) {
  for (double& v : dataset.images.values()) v = rng.uniform() < v ? 1.0 : 0.0;
}

Dataset head(const Dataset& dataset, std::size_t n) {
  n = std::min(n, dataset.size());
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Dataset out;
  out.images = gather_rows(dataset.images, idx);
  out.labels.assign(dataset.labels.begin(), dataset.labels.begin() + static_cast<std::ptrdiff_t>(n));
  out.labeled_mask.assign(dataset.labeled_mask.begin(),
                          dataset.labeled_mask.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

}  // namespace dvsdr::data

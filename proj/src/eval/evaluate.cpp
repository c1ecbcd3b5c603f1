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

#include "dvsdr/eval/evaluate.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "dvsdr/core/errors.hpp"
#include "dvsdr/nn/layers.hpp"
#include "dvsdr/nn/losses.hpp"

namespace dvsdr::eval {
namespace {

constexpr std::size_t kChunk = 1000;

// Applies `fn` to consecutive row chunks of `x` and stacks the results.
template <typename Fn>
Matrix map_chunks(const Matrix& x, std::size_t out_cols, Fn fn) {
  Matrix out(x.rows(), out_cols);
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < x.rows(); start += kChunk) {
    const std::size_t end = std::min(x.rows(), start + kChunk);
    idx.resize(end - start);
    std::iota(idx.begin(), idx.end(), start);
    const Matrix part = fn(gather_rows(x, idx));
    std::copy(part.values().begin(), part.values().end(),
              out.values().begin() + static_cast<std::ptrdiff_t>(start * out_cols));
  }
  return out;
}

}  // namespace

std::vector<int> argmax_rows(const Matrix& logits) {
  std::vector<int> out(logits.rows());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto row = logits.row(r);
    out[r] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

Matrix embed_all(const model::DvsdrModel& model, const Matrix& images) {
  return map_chunks(images, model.config.latent_dim,
                    [&](const Matrix& part) { return model::embed(model, part); });
}

std::vector<int> predict(const model::DvsdrModel& model, const Matrix& images) {
  const Matrix logits = map_chunks(images, model.config.class_count, [&](const Matrix& part) {
    return model::classify(model, model::embed(model, part));
  });
  return argmax_rows(logits);
}

double classification_error(const model::DvsdrModel& model, const Matrix& images,
                            std::span<const int> labels) {
  if (images.rows() == 0) throw DomainError("classification_error: empty dataset");
  if (labels.size() != images.rows()) {
    throw ShapeError("classification_error: " + std::to_string(labels.size()) +
                     " labels for " + std::to_string(images.rows()) + " images");
  }
  const std::vector<int> predicted = predict(model, images);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) wrong += predicted[i] != labels[i];
  return static_cast<double>(wrong) / static_cast<double>(labels.size());
}

double classification_error(const model::DvsdrModel& model, const data::Dataset& dataset) {
  return classification_error(model, dataset.images, dataset.labels);
}

Matrix reconstruct(const model::DvsdrModel& model, const Matrix& images) {
  return map_chunks(images, model.config.input_dim, [&](const Matrix& part) {
    return nn::sigmoid(model::decode(model, model::embed(model, part)));
  });
}

Matrix generate_prior(const model::DvsdrModel& model, std::size_t n, Rng& rng) {
  const std::size_t d = model.config.latent_dim;
  const Matrix z(n, d, sample_standard_normal(rng, n * d));
  return nn::sigmoid(model::decode(model, z));
}

GmmGeneration generate_gmm(const model::DvsdrModel& model, const gmm::GmmModel& mixture, Rng& rng,
                           std::size_t per_component) {
  if (mixture.dim() != model.config.latent_dim) {
    throw ShapeError("generate_gmm: mixture is " + std::to_string(mixture.dim()) +
                     "-dimensional but the model latent space is " +
                     std::to_string(model.config.latent_dim) + "-dimensional");
  }
  const std::size_t side = 28;
  if (model.config.input_dim != side * side) {
    throw ShapeError("generate_gmm: image grids need 784-pixel inputs");
  }
  GmmGeneration out;
  out.grid = ImageGrid{mixture.components(), per_component, side, side, {}};
  for (std::size_t k = 0; k < mixture.components(); ++k) {
    const Matrix z = gmm::sample_component(mixture, k, rng, per_component);
    const Matrix images = nn::sigmoid(model::decode(model, z));
    for (std::size_t i = 0; i < images.rows(); ++i) {
      out.grid.tiles.emplace_back(images.row(i).begin(), images.row(i).end());
    }

    const Matrix probs = nn::softmax(model::classify(model, z));
    const std::vector<int> votes = argmax_rows(probs);
    std::vector<std::size_t> counts(model.config.class_count, 0);
    for (int v : votes) ++counts[static_cast<std::size_t>(v)];
    const auto majority =
        static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    double confidence = 0.0;
    for (std::size_t i = 0; i < probs.rows(); ++i) confidence += probs(i, majority);
    if (probs.rows() > 0) confidence /= static_cast<double>(probs.rows());
    out.diagnostics.push_back({k, static_cast<int>(majority), confidence});
  }
  return out;
}

void export_embeddings(const model::DvsdrModel& model, const data::Dataset& dataset,
                       const std::filesystem::path& path) {
  const Matrix z = embed_all(model, dataset.images);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "index,label";
  for (std::size_t j = 0; j < z.cols(); ++j) out << ",z" << j + 1;
  out << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < z.rows(); ++i) {
    out << i << ',' << dataset.labels[i];
    for (double v : z.row(i)) out << ',' << v;
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace dvsdr::eval

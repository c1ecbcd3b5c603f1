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

#include <filesystem>
#include <span>
#include <vector>

#include "dvsdr/core/matrix.hpp"
#include "dvsdr/core/rng.hpp"
#include "dvsdr/data/dataset.hpp"
#include "dvsdr/eval/image_grid.hpp"
#include "dvsdr/gmm/gmm.hpp"
#include "dvsdr/model/model.hpp"

namespace dvsdr::eval {

/// Row-wise argmax; ties go to the smallest index.
std::vector<int> argmax_rows(const Matrix& logits);

/// Class predictions from the posterior-mean embedding, evaluated in chunks.
std::vector<int> predict(const model::DvsdrModel& model, const Matrix& images);

/// Fraction of samples whose predicted class differs from the label.
double classification_error(const model::DvsdrModel& model, const Matrix& images,
                            std::span<const int> labels);
double classification_error(const model::DvsdrModel& model, const data::Dataset& dataset);

/// Posterior means for every row of `images`, evaluated in chunks.
Matrix embed_all(const model::DvsdrModel& model, const Matrix& images);

/// sigmoid(decode(embed(x))).
Matrix reconstruct(const model::DvsdrModel& model, const Matrix& images);

/// n decoder means for z ~ N(0, I).
Matrix generate_prior(const model::DvsdrModel& model, std::size_t n, Rng& rng);

/// Which class the classifier assigns to samples from one mixture component.
struct ComponentDiagnostic {
  std::size_t component = 0;
  int majority_class = 0;
  double mean_confidence = 0.0;  // mean softmax probability of majority_class
};

struct GmmGeneration {
  ImageGrid grid;  // row k holds component k
  std::vector<ComponentDiagnostic> diagnostics;
};

/// Samples `per_component` latents from every component and decodes them.
/// Throws ShapeError when the mixture dimension differs from the latent dimension.
GmmGeneration generate_gmm(const model::DvsdrModel& model, const gmm::GmmModel& mixture, Rng& rng,
                           std::size_t per_component);

/// CSV "index,label,z1,...,zd" with 17 significant digits, in dataset order.
void export_embeddings(const model::DvsdrModel& model, const data::Dataset& dataset,
                       const std::filesystem::path& path);

}  // namespace dvsdr::eval

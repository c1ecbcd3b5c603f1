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
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dvsdr/core/matrix.hpp"
#include "dvsdr/core/rng.hpp"
#include "dvsdr/data/dataset.hpp"
#include "dvsdr/model/elbo.hpp"
#include "dvsdr/model/model.hpp"
#include "dvsdr/train/adam.hpp"

namespace dvsdr::train {

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 128;
  AdamConfig adam;
  std::uint64_t seed = 0;
  double alpha = 1.0;             // weight of the classification term
  std::size_t labeled_count = 0;  // |X_L|; must equal the dataset's labeled mask count
  bool use_unlabeled = true;      // false drops the unlabeled term entirely
  std::size_t steps_per_epoch = 0;  // 0: one pass over the longer stream
  std::filesystem::path checkpoint_path;  // empty: no checkpoints
  std::filesystem::path metrics_path;     // empty: no CSV

  /// Throws DomainError for non-positive counts or labeled_count > dataset_size.
  void validate(std::size_t dataset_size) const;
};

/// Per-epoch means over the optimizer steps of that epoch, plus errors at the end of it.
/// Unlabeled / labeled means are 0 when the corresponding stream is empty.
struct MetricsRow {
  std::size_t epoch = 0;
  double labeled_total = 0.0;
  double labeled_recon_ll = 0.0;
  double labeled_class_ll = 0.0;
  double labeled_kl = 0.0;
  double unlabeled_total = 0.0;
  double train_error = 0.0;  // on the labeled subset
  double test_error = 0.0;   // NaN when no evaluation set was given
  double wall_time_s = 0.0;
};

struct LabeledBatch {
  Matrix x;
  std::vector<int> labels;
};

/// Gradient of -(L_labeled + L_unlabeled) for one pair of batches with given noise.
/// Either batch may be empty (zero rows), not both.
struct SemisupGradient {
  model::ParamGrads grads;
  std::optional<model::ElboTerms> labeled;
  std::optional<model::ElboTerms> unlabeled;
};

SemisupGradient semisup_gradient(const model::DvsdrModel& model, const LabeledBatch& labeled,
                                 const Matrix& labeled_eps, const Matrix& unlabeled,
                                 const Matrix& unlabeled_eps, double alpha);

struct StepMetrics {
  std::optional<model::ElboTerms> labeled;
  std::optional<model::ElboTerms> unlabeled;
};

/// Draws labeled then unlabeled noise from `rng`, sums both gradients and
/// applies one Adam step. Throws DomainError if both batches are empty.
StepMetrics train_step_semisup(model::DvsdrModel& model, AdamState& state,
                               const LabeledBatch& labeled, const Matrix& unlabeled, Rng& rng,
                               double alpha = 1.0);

struct TrainResult {
  std::vector<MetricsRow> metrics;
  AdamState adam;
};

/// Trains `model` in place. Each epoch reshuffles X_L and X_U independently,
/// pairs one batch of each per step (the shorter stream cycles), then records
/// a MetricsRow, rewrites the metrics CSV and writes the latest checkpoint plus
/// a ".best" checkpoint whenever the test error improves.
using EpochCallback = std::function<void(const MetricsRow&)>;

TrainResult train(model::DvsdrModel& model, const data::Dataset& dataset,
                  const TrainConfig& config, const data::Dataset* test_set = nullptr,
                  const EpochCallback& on_epoch = {});

/// Columns: epoch, labeled_total, labeled_recon_ll, labeled_class_ll, labeled_kl,
/// unlabeled_total, train_error, test_error. Values use 17 significant digits.
void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricsRow> rows);

/// Columns: epoch, wall_time_s. Kept apart so the metrics CSV is reproducible.
void write_timing_csv(const std::filesystem::path& path, std::span<const MetricsRow> rows);

/// "<stem>.best<ext>" next to `checkpoint`.
std::filesystem::path best_checkpoint_path(const std::filesystem::path& checkpoint);

/// "<stem>.timing.csv" next to `metrics`.
std::filesystem::path timing_path(const std::filesystem::path& metrics);

}  // namespace dvsdr::train

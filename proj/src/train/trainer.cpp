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

#include "dvsdr/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include "dvsdr/core/errors.hpp"
#include "dvsdr/eval/evaluate.hpp"
#include "dvsdr/train/checkpoint.hpp"

namespace dvsdr::train {
namespace {

// Endless stream of shuffled batches over a fixed index set.
class BatchCursor {
 public:
  BatchCursor(std::vector<std::size_t> indices, std::size_t batch_size, Rng& rng)
      : indices_(std::move(indices)), batch_size_(batch_size), rng_(rng) {}

  bool empty() const noexcept { return indices_.empty(); }
  std::size_t batches_per_pass() const noexcept {
    return (indices_.size() + batch_size_ - 1) / batch_size_;
  }

  const std::vector<std::size_t>& next() {
    if (pos_ == batches_.size()) {
      batches_ = data::minibatches(indices_, batch_size_, rng_);
      pos_ = 0;
    }
    return batches_[pos_++];
  }

 private:
  std::vector<std::size_t> indices_;
  std::size_t batch_size_;
  Rng& rng_;
  std::vector<std::vector<std::size_t>> batches_;
  std::size_t pos_ = 0;
};

struct EpochSums {
  std::size_t labeled_steps = 0;
  std::size_t unlabeled_steps = 0;
  double labeled_total = 0.0;
  double labeled_recon = 0.0;
  double labeled_class = 0.0;
  double labeled_kl = 0.0;
  double unlabeled_total = 0.0;

  void add(const StepMetrics& m) {
    if (m.labeled) {
      ++labeled_steps;
      labeled_total += m.labeled->total;
      labeled_recon += m.labeled->recon_ll;
      labeled_class += m.labeled->class_ll.value_or(0.0);
      labeled_kl += m.labeled->kl;
    }
    if (m.unlabeled) {
      ++unlabeled_steps;
      unlabeled_total += m.unlabeled->total;
    }
  }
};

double mean(double sum, std::size_t n) { return n == 0 ? 0.0 : sum / static_cast<double>(n); }

std::vector<std::size_t> indices_where(const std::vector<bool>& mask, bool value) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == value) out.push_back(i);
  }
  return out;
}

LabeledBatch gather_labeled(const data::Dataset& ds, const std::vector<std::size_t>& idx) {
  LabeledBatch b{gather_rows(ds.images, idx), {}};
  b.labels.reserve(idx.size());
  for (std::size_t i : idx) b.labels.push_back(ds.labels[i]);
  return b;
}

}  // namespace

void TrainConfig::validate(std::size_t dataset_size) const {
  if (batch_size == 0) throw DomainError("train config: batch_size must be >= 1");
  if (labeled_count > dataset_size) {
    throw DomainError("train config: labeled_count " + std::to_string(labeled_count) +
                      " exceeds dataset size " + std::to_string(dataset_size));
  }
  if (!(adam.lr > 0.0)) throw DomainError("train config: lr must be positive");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw DomainError("train config: alpha must be a finite non-negative number");
  }
}

SemisupGradient semisup_gradient(const model::DvsdrModel& model, const LabeledBatch& labeled,
                                 const Matrix& labeled_eps, const Matrix& unlabeled,
                                 const Matrix& unlabeled_eps, double alpha) {
  const bool has_labeled = labeled.x.rows() > 0;
  const bool has_unlabeled = unlabeled.rows() > 0;
  if (!has_labeled && !has_unlabeled) {
    throw DomainError("semi-supervised step: both batches are empty");
  }
  SemisupGradient out;
  if (has_labeled) {
    model::ElboResult r = model::elbo_labeled(model, labeled.x, labeled.labels, labeled_eps, alpha);
    out.grads = std::move(r.grads);
    out.labeled = r.terms;
  }
  if (has_unlabeled) {
    model::ElboResult r = model::elbo_unlabeled(model, unlabeled, unlabeled_eps);
    if (has_labeled) {
      model::add_in_place(out.grads, r.grads);
    } else {
      out.grads = std::move(r.grads);
    }
    out.unlabeled = r.terms;
  }
  return out;
}

StepMetrics train_step_semisup(model::DvsdrModel& model, AdamState& state,
                               const LabeledBatch& labeled, const Matrix& unlabeled, Rng& rng,
                               double alpha) {
  const std::size_t d = model.config.latent_dim;
  const Matrix labeled_eps = model::draw_eps(rng, labeled.x.rows(), d);
  const Matrix unlabeled_eps = model::draw_eps(rng, unlabeled.rows(), d);
  SemisupGradient g = semisup_gradient(model, labeled, labeled_eps, unlabeled, unlabeled_eps, alpha);
  adam_step(model.params, g.grads, state);
  return {g.labeled, g.unlabeled};
}

TrainResult train(model::DvsdrModel& model, const data::Dataset& dataset,
                  const TrainConfig& config, const data::Dataset* test_set,
                  const EpochCallback& on_epoch) {
  config.validate(dataset.size());
  if (dataset.labeled_count() != config.labeled_count) {
    throw DomainError("train: dataset marks " + std::to_string(dataset.labeled_count()) +
                      " samples labeled but labeled_count is " +
                      std::to_string(config.labeled_count));
  }

  TrainResult result{{}, make_adam_state(model.params, config.adam)};
  if (config.epochs == 0) return result;

  Rng shuffle_rng = Rng::derive(config.seed, 1);
  Rng noise_rng = Rng::derive(config.seed, 2);
  const std::vector<std::size_t> labeled_idx = indices_where(dataset.labeled_mask, true);
  const std::vector<std::size_t> unlabeled_idx =
      config.use_unlabeled ? indices_where(dataset.labeled_mask, false) : std::vector<std::size_t>{};
  if (labeled_idx.empty() && unlabeled_idx.empty()) {
    throw DomainError("train: no labeled samples and the unlabeled stream is empty");
  }

  const Matrix labeled_images = gather_rows(dataset.images, labeled_idx);
  std::vector<int> labeled_labels;
  for (std::size_t i : labeled_idx) labeled_labels.push_back(dataset.labels[i]);

  double best_test_error = std::numeric_limits<double>::infinity();
  const auto start = std::chrono::steady_clock::now();

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    BatchCursor labeled_stream(labeled_idx, config.batch_size, shuffle_rng);
    BatchCursor unlabeled_stream(unlabeled_idx, config.batch_size, shuffle_rng);
    const std::size_t steps =
        config.steps_per_epoch > 0
            ? config.steps_per_epoch
            : std::max(labeled_stream.batches_per_pass(), unlabeled_stream.batches_per_pass());

    EpochSums sums;
    for (std::size_t step = 0; step < steps; ++step) {
      const LabeledBatch lb = labeled_stream.empty()
                                  ? LabeledBatch{}
                                  : gather_labeled(dataset, labeled_stream.next());
      const Matrix ub = unlabeled_stream.empty()
                            ? Matrix{}
                            : gather_rows(dataset.images, unlabeled_stream.next());
      sums.add(train_step_semisup(model, result.adam, lb, ub, noise_rng, config.alpha));
    }

    MetricsRow row;
    row.epoch = epoch;
    row.labeled_total = mean(sums.labeled_total, sums.labeled_steps);
    row.labeled_recon_ll = mean(sums.labeled_recon, sums.labeled_steps);
    row.labeled_class_ll = mean(sums.labeled_class, sums.labeled_steps);
    row.labeled_kl = mean(sums.labeled_kl, sums.labeled_steps);
    row.unlabeled_total = mean(sums.unlabeled_total, sums.unlabeled_steps);
    row.train_error = labeled_idx.empty()
                          ? 0.0
                          : eval::classification_error(model, labeled_images, labeled_labels);
    row.test_error = test_set != nullptr ? eval::classification_error(model, *test_set)
                                         : std::numeric_limits<double>::quiet_NaN();
    row.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.metrics.push_back(row);

    if (!config.metrics_path.empty()) {
      write_metrics_csv(config.metrics_path, result.metrics);
      write_timing_csv(timing_path(config.metrics_path), result.metrics);
    }
    if (!config.checkpoint_path.empty()) {
      save_checkpoint(config.checkpoint_path, model, result.adam, config.seed);
      if (test_set != nullptr && row.test_error < best_test_error) {
        best_test_error = row.test_error;
        save_checkpoint(best_checkpoint_path(config.checkpoint_path), model, result.adam,
                        config.seed);
      }
    }
    if (on_epoch) on_epoch(row);
  }
  return result;
}

void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricsRow> rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "epoch,labeled_total,labeled_recon_ll,labeled_class_ll,labeled_kl,unlabeled_total,"
         "train_error,test_error\n";
  out.precision(17);
  for (const MetricsRow& r : rows) {
    out << r.epoch << ',' << r.labeled_total << ',' << r.labeled_recon_ll << ','
        << r.labeled_class_ll << ',' << r.labeled_kl << ',' << r.unlabeled_total << ','
        << r.train_error << ',' << r.test_error << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_timing_csv(const std::filesystem::path& path, std::span<const MetricsRow> rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "epoch,wall_time_s\n";
  for (const MetricsRow& r : rows) out << r.epoch << ',' << r.wall_time_s << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

std::filesystem::path best_checkpoint_path(const std::filesystem::path& checkpoint) {
  std::filesystem::path p = checkpoint;
  p.replace_filename(checkpoint.stem().string() + ".best" + checkpoint.extension().string());
  return p;
}

std::filesystem::path timing_path(const std::filesystem::path& metrics) {
  std::filesystem::path p = metrics;
  p.replace_filename(metrics.stem().string() + ".timing.csv");
  return p;
}

}  // namespace dvsdr::train

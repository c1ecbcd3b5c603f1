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
#include <optional>
#include <string>

#include "dvsdr/model/model.hpp"
#include "dvsdr/train/trainer.hpp"

namespace dvsdr::cli {

/// Everything a run needs. Loaded from a JSON object whose keys match the
/// field names; command-line flags override individual fields afterwards.
struct RunConfig {
  std::filesystem::path data_dir;  // defaults to $DVSDR_DATA_DIR, else "data"
  std::filesystem::path out_dir = "runs/dvsdr";
  std::uint64_t seed = 0;

  model::ModelConfig model;

  std::size_t epochs = 20;
  std::size_t batch_size = 128;
  double lr = 1e-3;
  double alpha = 1.0;
  std::optional<std::size_t> labeled_count;  // unset: every training sample is labeled
  bool use_unlabeled = true;
  std::size_t steps_per_epoch = 0;
  bool binarize = false;
  std::size_t train_subset = 0;  // 0: whole split
  std::size_t test_subset = 0;

  /// Checks ranges; throws DomainError.
  void validate() const;

  train::TrainConfig train_config(std::size_t resolved_labeled_count) const;
};

RunConfig default_run_config();

/// Overlays the keys of a JSON object onto `base`. Unknown keys and ill-typed
/// values throw DomainError.
RunConfig apply_json(RunConfig base, const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base);

}  // namespace dvsdr::cli

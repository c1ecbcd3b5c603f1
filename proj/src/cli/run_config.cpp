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

#include "dvsdr/cli/run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <iterator>

#include "dvsdr/core/errors.hpp"
#include "json.hpp"

namespace dvsdr::cli {
namespace {

using nlohmann::json;

template <typename T>
T value_of(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw DomainError("config key '" + key + "' has the wrong type: " + j.dump());
  }
}

std::size_t count_of(const json& j, const std::string& key) {
  if (!j.is_number_unsigned()) {
    throw DomainError("config key '" + key + "' must be a non-negative integer, got " + j.dump());
  }
  return j.get<std::size_t>();
}

}  // namespace

RunConfig default_run_config() {
  RunConfig c;
  const char* env = std::getenv("DVSDR_DATA_DIR");
  c.data_dir = env != nullptr && *env != '\0' ? env : "data";
  return c;
}

void RunConfig::validate() const {
  model.validate();
  if (batch_size == 0) throw DomainError("batch_size must be >= 1");
  if (!(lr > 0.0)) throw DomainError("lr must be positive");
  if (!(alpha >= 0.0)) throw DomainError("alpha must be non-negative");
  if (labeled_count && *labeled_count == 0 && !use_unlabeled) {
    throw DomainError("labeled_count 0 with use_unlabeled=false leaves nothing to train on");
  }
}

train::TrainConfig RunConfig::train_config(std::size_t resolved_labeled_count) const {
  train::TrainConfig t;
  t.epochs = epochs;
  t.batch_size = batch_size;
  t.adam.lr = lr;
  t.seed = seed;
  t.alpha = alpha;
  t.labeled_count = resolved_labeled_count;
  t.use_unlabeled = use_unlabeled;
  t.steps_per_epoch = steps_per_epoch;
  t.checkpoint_path = out_dir / "checkpoint.ckpt";
  t.metrics_path = out_dir / "metrics.csv";
  return t;
}

RunConfig apply_json(RunConfig c, const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw DomainError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw DomainError("config must be a JSON object");

  for (const auto& [key, v] : j.items()) {
    if (key == "data_dir") c.data_dir = value_of<std::string>(v, key);
    else if (key == "out_dir") c.out_dir = value_of<std::string>(v, key);
    else if (key == "seed") c.seed = count_of(v, key);
    else if (key == "input_dim") c.model.input_dim = count_of(v, key);
    else if (key == "latent_dim") c.model.latent_dim = count_of(v, key);
    else if (key == "class_count") c.model.class_count = count_of(v, key);
    else if (key == "encoder_hidden") c.model.encoder_hidden = value_of<std::vector<std::size_t>>(v, key);
    else if (key == "decoder_hidden") c.model.decoder_hidden = value_of<std::vector<std::size_t>>(v, key);
    else if (key == "classifier_hidden") c.model.classifier_hidden = value_of<std::vector<std::size_t>>(v, key);
    else if (key == "epochs") c.epochs = count_of(v, key);
    else if (key == "batch_size") c.batch_size = count_of(v, key);
    else if (key == "lr") c.lr = value_of<double>(v, key);
    else if (key == "alpha") c.alpha = value_of<double>(v, key);
    else if (key == "labeled_count") c.labeled_count = count_of(v, key);
    else if (key == "use_unlabeled") c.use_unlabeled = value_of<bool>(v, key);
    else if (key == "steps_per_epoch") c.steps_per_epoch = count_of(v, key);
    else if (key == "binarize") c.binarize = value_of<bool>(v, key);
    else if (key == "train_subset") c.train_subset = count_of(v, key);
    else if (key == "test_subset") c.test_subset = count_of(v, key);
    else throw DomainError("unknown config key '" + key + "'");
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return apply_json(std::move(base), text);
}

}  // namespace dvsdr::cli

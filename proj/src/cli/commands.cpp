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

#include "dvsdr/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>

#include "CLI11.hpp"
#include "dvsdr/cli/run_config.hpp"
#include "dvsdr/core/errors.hpp"
#include "dvsdr/data/dataset.hpp"
#include "dvsdr/eval/evaluate.hpp"
#include "dvsdr/gmm/gmm.hpp"
#include "dvsdr/simd/kernels.hpp"
#include "dvsdr/train/checkpoint.hpp"
#include "dvsdr/train/trainer.hpp"
#include "json.hpp"

namespace dvsdr::cli {
namespace {

namespace fs = std::filesystem;

// Bad invocation or input discovered before any output is written.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Stream ids for Rng::derive; one --seed drives every consumer.
enum RngStream : std::uint64_t {
  kInitStream = 100,
  kBinarizeTrainStream = 101,
  kBinarizeTestStream = 102,
  kGenerateStream = 103,
};

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> labeled_count;
  std::optional<std::size_t> latent_dim;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> steps_per_epoch;
  std::optional<std::size_t> train_subset;
  std::optional<std::size_t> test_subset;
  std::optional<double> alpha;
  std::optional<std::string> out_dir;
  std::optional<std::string> data_dir;
  bool no_unlabeled = false;

  std::string checkpoint;
  std::string mode;
  std::size_t components = 10;
  std::optional<std::size_t> count;
  std::size_t per_component = 8;
  std::string gmm_path;
  std::string out;
  std::string split;
};

void add_run_options(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON run configuration");
  cmd->add_option("--seed", f.seed, "Seed for every random choice in the run");
  cmd->add_option("--latent-dim", f.latent_dim, "Latent dimension d");
  cmd->add_option("--out-dir", f.out_dir, "Directory for checkpoints, metrics and outputs");
  cmd->add_option("--data-dir", f.data_dir, "Directory with the IDX files (default $DVSDR_DATA_DIR)");
  cmd->add_option("--train-subset", f.train_subset, "Use only the first N training samples");
  cmd->add_option("--test-subset", f.test_subset, "Use only the first N test samples");
}

void add_checkpoint_option(CLI::App* cmd, Flags& f) {
  cmd->add_option("--checkpoint", f.checkpoint, "Checkpoint file (default <out-dir>/checkpoint.ckpt)");
}

RunConfig resolve(const Flags& f) {
  RunConfig c = default_run_config();
  if (!f.config.empty()) {
    if (!fs::exists(f.config)) throw UsageError("config file not found: " + f.config);
    c = load_run_config(f.config, c);
  }
  if (f.seed) c.seed = *f.seed;
  if (f.labeled_count) c.labeled_count = *f.labeled_count;
  if (f.latent_dim) c.model.latent_dim = *f.latent_dim;
  if (f.epochs) c.epochs = *f.epochs;
  if (f.batch_size) c.batch_size = *f.batch_size;
  if (f.steps_per_epoch) c.steps_per_epoch = *f.steps_per_epoch;
  if (f.train_subset) c.train_subset = *f.train_subset;
  if (f.test_subset) c.test_subset = *f.test_subset;
  if (f.alpha) c.alpha = *f.alpha;
  if (f.out_dir) c.out_dir = *f.out_dir;
  if (f.data_dir) c.data_dir = *f.data_dir;
  if (f.no_unlabeled) c.use_unlabeled = false;
  c.validate();
  return c;
}

bool model_flags_given(const Flags& f) { return !f.config.empty() || f.latent_dim.has_value(); }

data::Dataset load_split(const RunConfig& c, const std::string& split) {
  const data::IdxPaths paths = data::standard_paths(c.data_dir, split);
  for (const fs::path& p : {paths.images, paths.labels}) {
    if (!fs::is_regular_file(p)) throw UsageError("missing data file: " + p.string());
  }
  data::Dataset ds = data::load_dataset(paths.images, paths.labels, c.model.class_count);
  const std::size_t subset = split == "train" ? c.train_subset : c.test_subset;
  if (subset > 0) ds = data::head(ds, subset);
  if (c.binarize) {
    Rng rng = Rng::derive(c.seed, split == "train" ? kBinarizeTrainStream : kBinarizeTestStream);
    data::binarize(ds, rng);
  }
  if (ds.images.cols() != c.model.input_dim) {
    throw UsageError(paths.images.string() + " holds " + std::to_string(ds.images.cols()) +
                     "-pixel images but input_dim is " + std::to_string(c.model.input_dim));
  }
  return ds;
}

fs::path checkpoint_of(const Flags& f, const RunConfig& c) {
  return f.checkpoint.empty() ? c.out_dir / "checkpoint.ckpt" : fs::path(f.checkpoint);
}

train::Checkpoint open_checkpoint(const Flags& f, const RunConfig& c) {
  const fs::path path = checkpoint_of(f, c);
  if (!fs::is_regular_file(path)) throw UsageError("missing checkpoint: " + path.string());
  return train::load_checkpoint(path, model_flags_given(f) ? &c.model : nullptr);
}

void ensure_dir(const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
}

std::string pct(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * fraction);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_resolved_config(const RunConfig& c, std::size_t labeled, const fs::path& path) {
  const nlohmann::json j = {{"data_dir", c.data_dir.string()},
                            {"out_dir", c.out_dir.string()},
                            {"seed", c.seed},
                            {"input_dim", c.model.input_dim},
                            {"latent_dim", c.model.latent_dim},
                            {"class_count", c.model.class_count},
                            {"encoder_hidden", c.model.encoder_hidden},
                            {"decoder_hidden", c.model.decoder_hidden},
                            {"classifier_hidden", c.model.classifier_hidden},
                            {"epochs", c.epochs},
                            {"batch_size", c.batch_size},
                            {"lr", c.lr},
                            {"alpha", c.alpha},
                            {"labeled_count", labeled},
                            {"use_unlabeled", c.use_unlabeled},
                            {"steps_per_epoch", c.steps_per_epoch},
                            {"binarize", c.binarize},
                            {"train_subset", c.train_subset},
                            {"test_subset", c.test_subset}};
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

int cmd_train(const Flags& f, std::ostream& out, std::ostream& err) {
  const RunConfig c = resolve(f);
  const data::Dataset train_full = load_split(c, "train");
  const data::Dataset test_set = load_split(c, "test");
  const std::size_t labeled = c.labeled_count.value_or(train_full.size());
  const data::Dataset train_set = data::subsample_labels(train_full, labeled, c.seed, c.model.class_count);
  const train::TrainConfig tc = c.train_config(labeled);
  tc.validate(train_set.size());

  fs::create_directories(c.out_dir);
  write_resolved_config(c, labeled, c.out_dir / "config.json");

  Rng init_rng = Rng::derive(c.seed, kInitStream);
  model::DvsdrModel model = model::init_model(c.model, init_rng);
  err << "dvsdr train: " << train_set.size() << " training samples (" << labeled
      << " labeled), " << test_set.size() << " test samples, "
      << model::parameter_count(model.params) << " parameters, kernels="
      << simd::isa_name(simd::active().isa) << '\n';

  const train::TrainResult result =
      train::train(model, train_set, tc, &test_set, [&](const train::MetricsRow& r) {
        err << "epoch " << r.epoch << '/' << tc.epochs << " labeled_total=" << fixed(r.labeled_total, 4)
            << " class_ll=" << fixed(r.labeled_class_ll, 4) << " kl=" << fixed(r.labeled_kl, 4)
            << " unlabeled_total=" << fixed(r.unlabeled_total, 4)
            << " train_error_pct=" << pct(r.train_error) << " test_error_pct=" << pct(r.test_error)
            << " elapsed_s=" << fixed(r.wall_time_s, 1) << std::endl;
      });

  const double test_error =
      result.metrics.empty() ? eval::classification_error(model, test_set) : result.metrics.back().test_error;
  if (result.metrics.empty()) {
    train::save_checkpoint(tc.checkpoint_path, model, result.adam, c.seed);
    train::write_metrics_csv(tc.metrics_path, result.metrics);
  }
  out << "test_error_pct=" << pct(test_error) << '\n';
  return kExitOk;
}

int cmd_eval(const Flags& f, std::ostream& out) {
  const RunConfig c = resolve(f);
  const std::string split = f.split.empty() ? "test" : f.split;
  if (split != "train" && split != "test") throw UsageError("--split must be train or test");
  const train::Checkpoint ck = open_checkpoint(f, c);
  RunConfig data_cfg = c;
  data_cfg.model = ck.model.config;
  const data::Dataset ds = load_split(data_cfg, split);
  out << split << "_error_pct=" << pct(eval::classification_error(ck.model, ds)) << '\n';
  return kExitOk;
}

int cmd_generate(const Flags& f, std::ostream& out) {
  const RunConfig c = resolve(f);
  if (f.mode != "prior" && f.mode != "gmm" && f.mode != "reconstruct") {
    throw UsageError("--mode must be prior, gmm or reconstruct");
  }
  const train::Checkpoint ck = open_checkpoint(f, c);
  const model::DvsdrModel& model = ck.model;
  if (model.config.input_dim != 28 * 28) throw UsageError("generate needs a 28x28-pixel model");
  const fs::path target = f.out.empty() ? c.out_dir / ("generate_" + f.mode + ".pgm") : fs::path(f.out);
  Rng rng = Rng::derive(c.seed, kGenerateStream);

  eval::ImageGrid grid;
  std::vector<eval::ComponentDiagnostic> diagnostics;
  if (f.mode == "prior") {
    const std::size_t n = f.count.value_or(100);
    if (n == 0) throw UsageError("--count must be >= 1");
    const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
    grid = eval::make_grid(eval::generate_prior(model, n, rng), (n + cols - 1) / cols, cols);
  } else if (f.mode == "gmm") {
    if (f.gmm_path.empty()) throw UsageError("--mode gmm needs --gmm <file>");
    if (!fs::is_regular_file(f.gmm_path)) throw UsageError("missing mixture file: " + f.gmm_path);
    const gmm::GmmModel mixture = gmm::load_gmm(f.gmm_path);
    if (mixture.dim() != model.config.latent_dim) {
      throw UsageError("mixture in " + f.gmm_path + " is " + std::to_string(mixture.dim()) +
                       "-dimensional but the checkpoint latent space is " +
                       std::to_string(model.config.latent_dim) + "-dimensional");
    }
    eval::GmmGeneration gen = eval::generate_gmm(model, mixture, rng, f.per_component);
    grid = std::move(gen.grid);
    diagnostics = std::move(gen.diagnostics);
  } else {
    const std::string split = f.split.empty() ? "test" : f.split;
    RunConfig data_cfg = c;
    data_cfg.model = model.config;
    const data::Dataset ds = data::head(load_split(data_cfg, split), f.count.value_or(10));
    const Matrix recon = eval::reconstruct(model, ds.images);
    grid = eval::ImageGrid{ds.size(), 2, 28, 28, {}};
    for (std::size_t i = 0; i < ds.size(); ++i) {
      grid.tiles.emplace_back(ds.images.row(i).begin(), ds.images.row(i).end());
      grid.tiles.emplace_back(recon.row(i).begin(), recon.row(i).end());
    }
  }

  ensure_dir(target);
  eval::write_pgm_grid(grid, target);
  for (const auto& d : diagnostics) {
    out << "component=" << d.component << " majority_class=" << d.majority_class
        << " mean_confidence=" << fixed(d.mean_confidence, 4) << '\n';
  }
  out << "wrote " << target.string() << " grid=" << grid.rows << "x" << grid.cols << '\n';
  return kExitOk;
}

int cmd_fit_gmm(const Flags& f, std::ostream& out) {
  const RunConfig c = resolve(f);
  const train::Checkpoint ck = open_checkpoint(f, c);
  RunConfig data_cfg = c;
  data_cfg.model = ck.model.config;
  const data::Dataset ds = load_split(data_cfg, f.split.empty() ? "train" : f.split);
  if (f.components == 0 || f.components > ds.size()) {
    throw DomainError("--components " + std::to_string(f.components) + " must be in [1, " +
                      std::to_string(ds.size()) + "]");
  }
  const fs::path target = f.out.empty() ? c.out_dir / "gmm.json" : fs::path(f.out);

  const Matrix z = eval::embed_all(ck.model, ds.images);
  const gmm::GmmFit fit = gmm::fit_em(z, f.components, c.seed);
  ensure_dir(target);
  gmm::save_gmm(fit.model, target);

  // Diagnostic only: how each component lines up with the true labels.
  const std::vector<int> assigned = eval::argmax_rows(gmm::responsibilities(fit.model, z));
  const std::size_t classes = ck.model.config.class_count;
  std::vector<std::vector<std::size_t>> counts(f.components, std::vector<std::size_t>(classes, 0));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    ++counts[static_cast<std::size_t>(assigned[i])][static_cast<std::size_t>(ds.labels[i])];
  }
  for (std::size_t k = 0; k < f.components; ++k) {
    std::size_t size = 0;
    for (std::size_t n : counts[k]) size += n;
    const auto top = std::max_element(counts[k].begin(), counts[k].end());
    const double purity = size == 0 ? 0.0 : static_cast<double>(*top) / static_cast<double>(size);
    out << "component=" << k << " size=" << size << " majority_label=" << (top - counts[k].begin())
        << " purity=" << fixed(purity, 4) << '\n';
  }
  out << "iterations=" << fit.log_likelihood_trace.size() - 1 << '\n';
  out << "log_likelihood=" << full(fit.log_likelihood_trace.back()) << '\n';
  return kExitOk;
}

int cmd_embed(const Flags& f, std::ostream& out) {
  const RunConfig c = resolve(f);
  const train::Checkpoint ck = open_checkpoint(f, c);
  RunConfig data_cfg = c;
  data_cfg.model = ck.model.config;
  const data::Dataset ds = load_split(data_cfg, f.split.empty() ? "train" : f.split);
  const fs::path target = f.out.empty() ? c.out_dir / "embeddings.csv" : fs::path(f.out);
  ensure_dir(target);
  eval::export_embeddings(ck.model, ds, target);
  out << "wrote " << ds.size() << " rows to " << target.string() << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deep variational sufficient dimensionality reduction", "dvsdr"};
  app.require_subcommand(1);
  Flags f;

  CLI::App* train_cmd = app.add_subcommand("train", "Train a model and write checkpoints and metrics");
  add_run_options(train_cmd, f);
  train_cmd->add_option("--labeled-count", f.labeled_count, "Size of the class-balanced labeled subset");
  train_cmd->add_option("--epochs", f.epochs, "Training epochs");
  train_cmd->add_option("--batch-size", f.batch_size, "Minibatch size for each stream");
  train_cmd->add_option("--alpha", f.alpha, "Weight of the classification term");
  train_cmd->add_option("--steps-per-epoch", f.steps_per_epoch, "Optimizer steps per epoch (0: one pass)");
  train_cmd->add_flag("--no-unlabeled", f.no_unlabeled, "Drop the unlabeled term");

  CLI::App* eval_cmd = app.add_subcommand("eval", "Print the classification error of a checkpoint");
  add_run_options(eval_cmd, f);
  add_checkpoint_option(eval_cmd, f);
  eval_cmd->add_option("--split", f.split, "train or test (default test)");

  CLI::App* gen_cmd = app.add_subcommand("generate", "Write a PGM grid of generated images");
  add_run_options(gen_cmd, f);
  add_checkpoint_option(gen_cmd, f);
  gen_cmd->add_option("--mode", f.mode, "prior, gmm or reconstruct")->required();
  gen_cmd->add_option("--gmm", f.gmm_path, "Mixture JSON from fit-gmm (gmm mode)");
  gen_cmd->add_option("--count", f.count, "Images for prior (default 100) or reconstruct (default 10)");
  gen_cmd->add_option("--per-component", f.per_component, "Samples per mixture component (gmm mode)");
  gen_cmd->add_option("--split", f.split, "Source split for reconstruct mode (default test)");
  gen_cmd->add_option("--out", f.out, "Output PGM path");

  CLI::App* gmm_cmd = app.add_subcommand("fit-gmm", "Fit a Gaussian mixture to training embeddings");
  add_run_options(gmm_cmd, f);
  add_checkpoint_option(gmm_cmd, f);
  gmm_cmd->add_option("--components", f.components, "Mixture components K (default 10)");
  gmm_cmd->add_option("--split", f.split, "Split to embed (default train)");
  gmm_cmd->add_option("--out", f.out, "Output JSON path");

  CLI::App* embed_cmd = app.add_subcommand("embed", "Export posterior-mean embeddings as CSV");
  add_run_options(embed_cmd, f);
  add_checkpoint_option(embed_cmd, f);
  embed_cmd->add_option("--split", f.split, "train or test (default train)");
  embed_cmd->add_option("--out", f.out, "Output CSV path");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(f, out, err);
    if (eval_cmd->parsed()) return cmd_eval(f, out);
    if (gen_cmd->parsed()) return cmd_generate(f, out);
    if (gmm_cmd->parsed()) return cmd_fit_gmm(f, out);
    if (embed_cmd->parsed()) return cmd_embed(f, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigMismatchError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace dvsdr::cli

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

#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "dvsdr/core/errors.hpp"
#include "dvsdr/eval/evaluate.hpp"
#include "dvsdr/eval/image_grid.hpp"
#include "dvsdr/gmm/gmm.hpp"
#include "dvsdr/model/elbo.hpp"
#include "dvsdr/nn/layers.hpp"
#include "dvsdr/train/adam.hpp"
#include "support.hpp"

using dvsdr::Matrix;
using dvsdr::Rng;
namespace eval = dvsdr::eval;
namespace model = dvsdr::model;

namespace {

model::ModelConfig mnist_shaped(std::size_t d) {
  model::ModelConfig c;
  c.latent_dim = d;
  c.encoder_hidden = {16};
  c.decoder_hidden = {16};
  c.classifier_hidden = {8};
  return c;
}

bool gen_shape_ok(const eval::GmmGeneration& g) {
  return g.grid.rows == 10 && g.grid.cols == 8 && g.grid.tiles.size() == 80 && g.diagnostics.size() == 10;
}

}  // namespace

TEST_CASE("argmax picks the first maximum") {
  const Matrix logits{{1, 3, 3}, {5, 1, 0}, {-1, -1, -1}};
  CHECK(eval::argmax_rows(logits) == std::vector<int>{1, 0, 0});
}

TEST_CASE("single 28x28 PGM has the exact header and size") {
  testing::TempDir dir;
  Rng rng(1);
  const Matrix img = testing::random_matrix(rng, 1, 784, 0, 1);
  eval::write_pgm_grid(eval::make_grid(img, 1, 1), dir / "one.pgm");
  const std::string bytes = testing::read_file(dir / "one.pgm");
  const std::string header = "P5 28 28 255\n";
  REQUIRE(bytes.size() == header.size() + 784);
  CHECK(bytes.substr(0, header.size()) == header);
  for (std::size_t i = 0; i < 784; ++i)
    CHECK(static_cast<unsigned char>(bytes[header.size() + i]) == eval::quantize(img(0, i)));
}

TEST_CASE("grids, quantisation and read-back") {
  CHECK(eval::quantize(0.0) == 0);
  CHECK(eval::quantize(1.0) == 255);
  CHECK(eval::quantize(0.5) == 128);
  CHECK(eval::quantize(-3.0) == 0);
  CHECK(eval::quantize(7.0) == 255);

  testing::TempDir dir;
  Rng rng(2);
  const Matrix imgs = testing::random_matrix(rng, 5, 784, 0, 1);
  const eval::ImageGrid grid = eval::make_grid(imgs, 2, 3);
  const eval::GrayImage rendered = eval::render(grid);
  CHECK(rendered.width == 3 * 28 + 2 * eval::kGutter);
  CHECK(rendered.height == 2 * 28 + eval::kGutter);
  // the empty sixth cell and gutters stay white
  CHECK(rendered.pixels[(rendered.height - 1) * rendered.width + rendered.width - 1] == 255);
  CHECK(rendered.pixels[28] == 255);
  CHECK(rendered.pixels[0] == eval::quantize(imgs(0, 0)));
  eval::write_pgm(rendered, dir / "g.pgm");
  const eval::GrayImage back = eval::read_pgm(dir / "g.pgm");
  CHECK(back.width == rendered.width);
  CHECK(back.height == rendered.height);
  CHECK(back.pixels == rendered.pixels);
  CHECK_THROWS_AS(eval::make_grid(imgs, 2, 2), dvsdr::ShapeError);
  CHECK_THROWS_AS(eval::make_grid(Matrix(1, 10), 1, 1), dvsdr::ShapeError);
  std::ofstream(dir / "bad.pgm") << "P2 1 1 255\n0";
  CHECK_THROWS_AS(eval::read_pgm(dir / "bad.pgm"), dvsdr::FormatError);
}

TEST_CASE("classification error properties") {
  Rng rng(3);
  model::ModelConfig cfg = testing::toy_config();
  cfg.class_count = 10;
  const model::DvsdrModel m = model::init_model(cfg, rng);
  const Matrix x = testing::random_matrix(rng, 400, 6, 0, 1);
  const std::vector<int> pred = eval::predict(m, x);
  CHECK(eval::classification_error(m, x, pred) == 0.0);

  // every label shifted: all wrong
  std::vector<int> shifted = pred;
  for (int& y : shifted) y = (y + 1) % 10;
  CHECK(eval::classification_error(m, x, shifted) == 1.0);

  // permuting samples together with labels changes nothing
  std::vector<std::size_t> order(400);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  const std::vector<int> truth = testing::random_labels(rng, 400, 10);
  std::vector<int> permuted_truth;
  for (std::size_t i : order) permuted_truth.push_back(truth[i]);
  CHECK(eval::classification_error(m, dvsdr::gather_rows(x, order), permuted_truth) ==
        eval::classification_error(m, x, truth));
  // unrelated labels: error near 0.9
  CHECK(eval::classification_error(m, x, truth) == doctest::Approx(0.9).epsilon(0.06));

  CHECK_THROWS_AS(eval::classification_error(m, Matrix(0, 6), std::vector<int>{}), dvsdr::DomainError);
  CHECK_THROWS_AS(eval::classification_error(m, x, std::vector<int>(3)), dvsdr::ShapeError);
}

TEST_CASE("predictions do not depend on chunking") {
  Rng rng(4);
  const model::DvsdrModel m = model::init_model(mnist_shaped(3), rng);
  const Matrix x = testing::random_matrix(rng, 2500, 784, 0, 1);
  const std::vector<int> all = eval::predict(m, x);
  std::vector<std::size_t> tail_idx(500);
  std::iota(tail_idx.begin(), tail_idx.end(), std::size_t{2000});
  const std::vector<int> tail = eval::predict(m, dvsdr::gather_rows(x, tail_idx));
  CHECK(std::equal(tail.begin(), tail.end(), all.begin() + 2000));
  CHECK(eval::embed_all(m, x).rows() == 2500);
}

TEST_CASE("generation outputs") {
  Rng rng(5);
  const model::DvsdrModel m = model::init_model(mnist_shaped(2), rng);
  const Matrix prior = eval::generate_prior(m, 7, rng);
  CHECK(prior.rows() == 7);
  CHECK(prior.cols() == 784);
  for (double v : prior.values()) CHECK((v >= 0.0 && v <= 1.0));
  const Matrix x = testing::random_matrix(rng, 3, 784, 0, 1);
  CHECK(eval::reconstruct(m, x).rows() == 3);

  const dvsdr::gmm::GmmModel mix{{0.25, 0.25, 0.5}, Matrix{{0, 0}, {1, 1}, {-1, 2}}, Matrix(3, 2, 0.5)};
  const eval::GmmGeneration gen = eval::generate_gmm(m, mix, rng, 4);
  CHECK(gen.grid.rows == 3);
  CHECK(gen.grid.cols == 4);
  CHECK(gen.grid.tiles.size() == 12);
  REQUIRE(gen.diagnostics.size() == 3);
  for (const auto& d : gen.diagnostics) {
    CHECK(d.majority_class >= 0);
    CHECK(d.majority_class < 10);
    CHECK(d.mean_confidence > 0.0);
    CHECK(d.mean_confidence <= 1.0);
  }
  const dvsdr::gmm::GmmModel wrong{{1.0}, Matrix(1, 3), Matrix(1, 3, 1.0)};
  CHECK_THROWS_AS(eval::generate_gmm(m, wrong, rng, 4), dvsdr::ShapeError);
}

TEST_CASE("embedding export") {
  testing::TempDir dir;
  Rng rng(6);
  const model::DvsdrModel m = model::init_model(mnist_shaped(3), rng);
  dvsdr::data::Dataset ds{testing::random_matrix(rng, 4, 784, 0, 1), {3, 1, 4, 1},
                          std::vector<bool>(4, true)};
  eval::export_embeddings(m, ds, dir / "e.csv");
  std::istringstream in(testing::read_file(dir / "e.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "index,label,z1,z2,z3");  // d=3: five columns
  const Matrix z = eval::embed_all(m, ds.images);
  for (std::size_t i = 0; i < 4; ++i) {
    REQUIRE(std::getline(in, line));
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    CHECK(std::stoul(cell) == i);
    std::getline(row, cell, ',');
    CHECK(std::stoi(cell) == ds.labels[i]);
    for (std::size_t j = 0; j < 3; ++j) {
      std::getline(row, cell, ',');
      CHECK(std::stod(cell) == z(i, j));
    }
  }
  CHECK_FALSE(std::getline(in, line));
}

TEST_CASE("an all-black tile") {
  testing::TempDir dir;
  eval::write_pgm_grid(eval::make_grid(Matrix(1, 784), 1, 1), dir / "black.pgm");
  const std::string bytes = testing::read_file(dir / "black.pgm");
  CHECK(bytes == "P5 28 28 255\n" + std::string(784, '\0'));
}

TEST_CASE("prior sampling and the prior mode") {
  Rng rng(7);
  const model::DvsdrModel m = model::init_model(mnist_shaped(2), rng);
  Rng a(1), b(1);
  CHECK(eval::generate_prior(m, 5, a) == eval::generate_prior(m, 5, b));
  const Matrix mode = dvsdr::nn::sigmoid(model::decode(m, Matrix(1, 2)));
  CHECK(dvsdr::all_finite(mode));
  for (double v : mode.values()) CHECK((v > 0.0 && v < 1.0));
  const dvsdr::gmm::GmmModel ten{std::vector<double>(10, 0.1), Matrix(10, 2), Matrix(10, 2, 1.0)};
  const eval::GmmGeneration g = eval::generate_gmm(m, ten, rng, 8);
  CHECK(gen_shape_ok(g));
}

TEST_CASE("reconstructions beat the mean image after a little training") {
  // a dataset of two repeated patterns
  Rng rng(8);
  model::ModelConfig cfg = mnist_shaped(2);
  model::DvsdrModel m = model::init_model(cfg, rng);
  Matrix x(40, 784);
  for (std::size_t i = 0; i < 40; ++i)
    for (std::size_t p = 0; p < 784; ++p) x(i, p) = ((p / 28) < 14) == (i % 2 == 0) ? 0.95 : 0.05;
  dvsdr::train::AdamState s = dvsdr::train::make_adam_state(m.params);
  for (int step = 0; step < 150; ++step)
    dvsdr::train::adam_step(m.params, model::elbo_unlabeled(m, x, rng).grads, s);
  const Matrix rec = eval::reconstruct(m, x);
  CHECK(eval::reconstruct(m, x) == rec);
  Matrix mean_image(40, 784);
  for (std::size_t p = 0; p < 784; ++p) {
    double mu = 0;
    for (std::size_t i = 0; i < 40; ++i) mu += x(i, p);
    for (std::size_t i = 0; i < 40; ++i) mean_image(i, p) = mu / 40;
  }
  auto bce = [&](const Matrix& probs) {
    double total = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double q = std::clamp(probs.values()[k], 1e-12, 1 - 1e-12);
      total -= x.values()[k] * std::log(q) + (1 - x.values()[k]) * std::log(1 - q);
    }
    return total;
  };
  for (double v : rec.values()) CHECK((v > 0.0 && v < 1.0));
  CHECK(bce(rec) < bce(mean_image));
}

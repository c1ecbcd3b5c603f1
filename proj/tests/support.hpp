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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <unistd.h>

#include "dvsdr/core/matrix.hpp"
#include "dvsdr/core/rng.hpp"
#include "dvsdr/data/idx.hpp"
#include "dvsdr/model/model.hpp"

namespace testing {

inline dvsdr::Matrix random_matrix(dvsdr::Rng& rng, std::size_t r, std::size_t c,
                                   double lo = -1.0, double hi = 1.0) {
  dvsdr::Matrix m(r, c);
  for (double& v : m.values()) v = lo + (hi - lo) * rng.uniform();
  return m;
}

inline std::vector<int> random_labels(dvsdr::Rng& rng, std::size_t n, std::size_t classes) {
  std::vector<int> y(n);
  for (int& v : y) v = static_cast<int>(rng.uniform_index(classes));
  return y;
}

// The small architecture used by the gradient checks.
inline dvsdr::model::ModelConfig toy_config() {
  dvsdr::model::ModelConfig c;
  c.input_dim = 6;
  c.latent_dim = 2;
  c.class_count = 2;
  c.encoder_hidden = {5};
  c.decoder_hidden = {5};
  c.classifier_hidden = {5};
  return c;
}

inline double relative_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / scale;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("dvsdr_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Writes an MNIST-layout split whose images carry a class-dependent bright stripe.
inline void write_synthetic_split(const std::filesystem::path& dir, const std::string& prefix,
                                  std::size_t n, std::uint64_t seed, std::size_t side = 28) {
  dvsdr::Rng rng(seed);
  dvsdr::data::IdxTensor images{dvsdr::data::kIdxImagesMagic,
                                {static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(side),
                                 static_cast<std::uint32_t>(side)},
                                {}};
  dvsdr::data::IdxTensor labels{dvsdr::data::kIdxLabelsMagic, {static_cast<std::uint32_t>(n)}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    const auto y = static_cast<std::uint8_t>(i % 10);
    labels.payload.push_back(y);
    for (std::size_t r = 0; r < side; ++r) {
      for (std::size_t c = 0; c < side; ++c) {
        const bool stripe = (r * 10 / side) == y;
        const double noise = rng.uniform() * 40.0;
        images.payload.push_back(static_cast<std::uint8_t>(stripe ? 215.0 + noise : noise));
      }
    }
  }
  std::filesystem::create_directories(dir);
  dvsdr::data::write_idx(dir / (prefix + "-images-idx3-ubyte"), images);
  dvsdr::data::write_idx(dir / (prefix + "-labels-idx1-ubyte"), labels);
}

inline void write_synthetic_mnist(const std::filesystem::path& dir, std::size_t n_train = 200,
                                  std::size_t n_test = 100) {
  write_synthetic_split(dir, "train", n_train, 11);
  write_synthetic_split(dir, "t10k", n_test, 12);
}

}  // namespace testing

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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dvsdr {

/// xoshiro256** generator seeded through splitmix64, with a Box-Muller normal
/// sampler. The stream depends only on the seed; no platform generator is used.
///
/// Single owner: pass by reference or move, never share across threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) noexcept;

  /// A generator whose stream is a deterministic function of (seed, stream_id).
  static Rng derive(std::uint64_t seed, std::uint64_t stream_id) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform integer on [0, bound); bound must be > 0.
  std::uint64_t uniform_index(std::uint64_t bound) noexcept;
  double normal() noexcept;

  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  bool operator==(const Rng&) const = default;

 private:
  std::uint64_t seed_ = 0;
  std::array<std::uint64_t, 4> state_{};
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// n i.i.d. N(0, 1) draws; advances `rng`.
std::vector<double> sample_standard_normal(Rng& rng, std::size_t n);

}  // namespace dvsdr

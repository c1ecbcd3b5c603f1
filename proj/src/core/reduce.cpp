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

#include "dvsdr/core/reduce.hpp"

#include <algorithm>
#include <cmath>

#include "dvsdr/core/errors.hpp"

namespace dvsdr {

double logsumexp(std::span<const double> v) {
  if (v.empty()) throw DomainError("logsumexp: empty input");
  if (v.size() == 1) return v[0];
  const auto top = std::max_element(v.begin(), v.end());
  const double shift = *top;
  if (!std::isfinite(shift)) return shift;
  double rest = 0.0;
  for (auto it = v.begin(); it != v.end(); ++it) {
    if (it != top) rest += std::exp(*it - shift);
  }
  return shift + std::log1p(rest);
}

}  // namespace dvsdr

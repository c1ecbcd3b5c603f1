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

#include <cstdlib>
#include <string_view>

#include "tables.hpp"

namespace dvsdr::simd {
namespace {

bool cpu_has(Isa isa) noexcept {
#if defined(DVSDR_HAVE_X86_SIMD)
  __builtin_cpu_init();
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2: return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    case Isa::avx512: return __builtin_cpu_supports("avx512f") && __builtin_cpu_supports("fma");
  }
  return false;
#else
  return isa == Isa::scalar;
#endif
}

const KernelTable* compiled_table(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return &detail::kScalarTable;
#if defined(DVSDR_HAVE_X86_SIMD)
    case Isa::avx2: return &detail::kAvx2Table;
    case Isa::avx512: return &detail::kAvx512Table;
#else
    default: return nullptr;
#endif
  }
  return nullptr;
}

const KernelTable& select() noexcept {
  if (const char* forced = std::getenv("DVSDR_SIMD")) {
    const std::string_view name(forced);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::avx512}) {
      if (name == isa_name(isa)) {
        if (const KernelTable* t = table_for(isa)) return *t;
      }
    }
  }
  for (Isa isa : {Isa::avx512, Isa::avx2}) {
    if (const KernelTable* t = table_for(isa)) return *t;
  }
  return detail::kScalarTable;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::avx512: return "avx512";
  }
  return "unknown";
}

const KernelTable* table_for(Isa isa) noexcept {
  return cpu_has(isa) ? compiled_table(isa) : nullptr;
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::scalar, Isa::avx2, Isa::avx512}) {
    if (table_for(isa) != nullptr) out.push_back(isa);
  }
  return out;
}

const KernelTable& active() noexcept {
  static const KernelTable& table = select();
  return table;
}

}  // namespace dvsdr::simd

// Copyright 2026 The wsmom Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wsmom/kernels.hpp"

#include <atomic>

namespace wsmom::kernels {
namespace {

struct Table {
  void (*spin_sum)(std::span<const SpinTerm>, std::uint32_t, std::span<double>);
  std::uint64_t (*count_disagreements)(std::span<const std::uint64_t>,
                                       std::span<const std::uint64_t>);
};

const Table kScalar{&scalar::spin_sum, &scalar::count_disagreements};
#if defined(WSMOM_HAVE_AVX2)
const Table kAvx2{&avx2::spin_sum, &avx2::count_disagreements};
#endif
#if defined(WSMOM_HAVE_NEON)
const Table kNeon{&neon::spin_sum, &neon::count_disagreements};
#endif

bool supported(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(WSMOM_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("popcnt");
#else
      return false;
#endif
    case Isa::kNeon:
#if defined(WSMOM_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const Table& table_for(Isa isa) {
  switch (isa) {
#if defined(WSMOM_HAVE_AVX2)
    case Isa::kAvx2:
      return kAvx2;
#endif
#if defined(WSMOM_HAVE_NEON)
    case Isa::kNeon:
      return kNeon;
#endif
    default:
      return kScalar;
  }
}

std::atomic<Isa>& selection() {
  static std::atomic<Isa> isa{detected_isa()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
    case Isa::kNeon:
      return "neon";
  }
  return "unknown";
}

Isa detected_isa() {
  if (supported(Isa::kAvx2)) return Isa::kAvx2;
  if (supported(Isa::kNeon)) return Isa::kNeon;
  return Isa::kScalar;
}

Isa active_isa() { return selection().load(std::memory_order_relaxed); }

bool set_isa(Isa isa) {
  if (!supported(isa)) return false;
  selection().store(isa, std::memory_order_relaxed);
  return true;
}

void spin_sum(std::span<const SpinTerm> terms, std::uint32_t first,
              std::span<double> out) {
  table_for(active_isa()).spin_sum(terms, first, out);
}

std::uint64_t count_disagreements(std::span<const std::uint64_t> a,
                                  std::span<const std::uint64_t> b) {
  return table_for(active_isa()).count_disagreements(a, b);
}

}  // namespace wsmom::kernels

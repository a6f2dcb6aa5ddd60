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

#ifndef WSMOM_KERNELS_HPP
#define WSMOM_KERNELS_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

// Data-parallel inner loops. Each kernel has a portable scalar reference and
// SIMD variants; the variant is chosen once at startup from CPU features and
// can be pinned for equivalence testing.
namespace wsmom::kernels {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view isa_name(Isa isa);

/// Best variant the running CPU supports.
Isa detected_isa();

/// Variant currently used by the dispatching entry points.
Isa active_isa();

/// Pins the dispatching entry points to `isa`. Returns false (and leaves the
/// selection unchanged) when the CPU or the build does not support it.
bool set_isa(Isa isa);

/// One term of a multilinear form over spins: `weight` times the product of
/// the spins selected by `mask`. Bit b of a state index is spin +1 when set
/// and -1 when clear.
struct SpinTerm {
  std::uint32_t mask;
  double weight;
};

/// out[k] = sum_t terms[t].weight * prod_{b in mask_t} spin_b(first + k).
/// Terms are accumulated in order, so every variant returns bit-identical
/// results.
void spin_sum(std::span<const SpinTerm> terms, std::uint32_t first,
              std::span<double> out);

/// Number of positions where two bit-packed columns differ. Padding bits past
/// the logical length must be zero in both columns.
std::uint64_t count_disagreements(std::span<const std::uint64_t> a,
                                  std::span<const std::uint64_t> b);

// Individual variants, exposed for equivalence tests and benchmarks.
namespace scalar {
void spin_sum(std::span<const SpinTerm> terms, std::uint32_t first,
              std::span<double> out);
std::uint64_t count_disagreements(std::span<const std::uint64_t> a,
                                  std::span<const std::uint64_t> b);
}  // namespace scalar

#if defined(WSMOM_HAVE_AVX2)
namespace avx2 {
void spin_sum(std::span<const SpinTerm> terms, std::uint32_t first,
              std::span<double> out);
std::uint64_t count_disagreements(std::span<const std::uint64_t> a,
                                  std::span<const std::uint64_t> b);
}  // namespace avx2
#endif

#if defined(WSMOM_HAVE_NEON)
namespace neon {
void spin_sum(std::span<const SpinTerm> terms, std::uint32_t first,
              std::span<double> out);
std::uint64_t count_disagreements(std::span<const std::uint64_t> a,
                                  std::span<const std::uint64_t> b);
}  // namespace neon
#endif

}  // namespace wsmom::kernels

#endif  // WSMOM_KERNELS_HPP

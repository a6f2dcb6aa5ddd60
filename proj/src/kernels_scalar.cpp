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

#include <bit>

#include "wsmom/kernels.hpp"

namespace wsmom::kernels::scalar {

void spin_sum(std::span<const SpinTerm> terms, std::uint32_t first,
              std::span<double> out) {
  for (std::size_t k = 0; k < out.size(); ++k) {
    const std::uint32_t state = first + static_cast<std::uint32_t>(k);
    double acc = 0.0;
    for (const SpinTerm& t : terms) {
      // Odd number of -1 spins flips the sign.
      const bool negative = std::popcount(~state & t.mask) & 1U;
      acc += negative ? -t.weight : t.weight;
    }
    out[k] = acc;
  }
}

std::uint64_t count_disagreements(std::span<const std::uint64_t> a,
                                  std::span<const std::uint64_t> b) {
  std::uint64_t total = 0;
  for (std::size_t w = 0; w < a.size(); ++w) total += std::popcount(a[w] ^ b[w]);
  return total;
}

}  // namespace wsmom::kernels::scalar

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

// Compiled only for AArch64 targets.
#include <arm_neon.h>

#include <bit>

#include "wsmom/kernels.hpp"

namespace wsmom::kernels::neon {

void spin_sum(std::span<const SpinTerm> terms, std::uint32_t first,
              std::span<double> out) {
  const std::size_t n = out.size();
  std::size_t k = 0;
  const uint32x4_t lane = {0, 1, 2, 3};
  for (; k + 4 <= n; k += 4) {
    const uint32x4_t state = vaddq_u32(vdupq_n_u32(first + static_cast<std::uint32_t>(k)), lane);
    float64x2_t acc_lo = vdupq_n_f64(0.0);
    float64x2_t acc_hi = vdupq_n_f64(0.0);
    for (const SpinTerm& t : terms) {
      const uint32x4_t masked = vbicq_u32(vdupq_n_u32(t.mask), state);
      // Byte popcounts summed pairwise give a per-lane count.
      const uint32x4_t cnt =
          vpaddlq_u16(vpaddlq_u8(vcntq_u8(vreinterpretq_u8_u32(masked))));
      const uint32x4_t par = vandq_u32(cnt, vdupq_n_u32(1));
      const uint64x2_t sign_lo = vshlq_n_u64(vmovl_u32(vget_low_u32(par)), 63);
      const uint64x2_t sign_hi = vshlq_n_u64(vmovl_u32(vget_high_u32(par)), 63);
      const uint64x2_t w = vreinterpretq_u64_f64(vdupq_n_f64(t.weight));
      acc_lo = vaddq_f64(acc_lo, vreinterpretq_f64_u64(veorq_u64(w, sign_lo)));
      acc_hi = vaddq_f64(acc_hi, vreinterpretq_f64_u64(veorq_u64(w, sign_hi)));
    }
    vst1q_f64(out.data() + k, acc_lo);
    vst1q_f64(out.data() + k + 2, acc_hi);
  }
  if (k < n) scalar::spin_sum(terms, first + static_cast<std::uint32_t>(k), out.subspan(k));
}

std::uint64_t count_disagreements(std::span<const std::uint64_t> a,
                                  std::span<const std::uint64_t> b) {
  const std::size_t words = a.size();
  std::size_t w = 0;
  uint64x2_t total = vdupq_n_u64(0);
  for (; w + 2 <= words; w += 2) {
    const uint8x16_t x = vreinterpretq_u8_u64(veorq_u64(vld1q_u64(a.data() + w), vld1q_u64(b.data() + w)));
    total = vaddq_u64(total, vpaddlq_u32(vpaddlq_u16(vpaddlq_u8(vcntq_u8(x)))));
  }
  std::uint64_t count = vgetq_lane_u64(total, 0) + vgetq_lane_u64(total, 1);
  for (; w < words; ++w) count += std::popcount(a[w] ^ b[w]);
  return count;
}

}  // namespace wsmom::kernels::neon

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

// Compiled with -mavx2; only reached when the CPU reports AVX2.
#include <immintrin.h>

#include <algorithm>
#include <bit>
#include <cstring>

#include "wsmom/kernels.hpp"

namespace wsmom::kernels::avx2 {
namespace {

inline __m256i parity32(__m256i x) {
  x = _mm256_xor_si256(x, _mm256_srli_epi32(x, 16));
  x = _mm256_xor_si256(x, _mm256_srli_epi32(x, 8));
  x = _mm256_xor_si256(x, _mm256_srli_epi32(x, 4));
  x = _mm256_xor_si256(x, _mm256_srli_epi32(x, 2));
  x = _mm256_xor_si256(x, _mm256_srli_epi32(x, 1));
  return _mm256_and_si256(x, _mm256_set1_epi32(1));
}

// Per-byte popcount via the nibble lookup table, summed into 64-bit lanes.
inline __m256i popcount_bytes(__m256i v) {
  const __m256i lut = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4,
                                       0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
  const __m256i low_mask = _mm256_set1_epi8(0x0f);
  const __m256i lo = _mm256_and_si256(v, low_mask);
  const __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low_mask);
  return _mm256_add_epi8(_mm256_shuffle_epi8(lut, lo), _mm256_shuffle_epi8(lut, hi));
}

}  // namespace

void spin_sum(std::span<const SpinTerm> terms, std::uint32_t first,
              std::span<double> out) {
  const std::size_t n = out.size();
  std::size_t k = 0;
  const __m256i lane = _mm256_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7);
  for (; k + 8 <= n; k += 8) {
    const __m256i state =
        _mm256_add_epi32(_mm256_set1_epi32(static_cast<int>(first + k)), lane);
    __m256d acc_lo = _mm256_setzero_pd();
    __m256d acc_hi = _mm256_setzero_pd();
    for (const SpinTerm& t : terms) {
      const __m256i masked =
          _mm256_andnot_si256(state, _mm256_set1_epi32(static_cast<int>(t.mask)));
      const __m256i par = parity32(masked);
      // Move parity into the sign bit of each double.
      const __m256i sign_lo =
          _mm256_slli_epi64(_mm256_cvtepu32_epi64(_mm256_castsi256_si128(par)), 63);
      const __m256i sign_hi =
          _mm256_slli_epi64(_mm256_cvtepu32_epi64(_mm256_extracti128_si256(par, 1)), 63);
      const __m256d w = _mm256_set1_pd(t.weight);
      acc_lo = _mm256_add_pd(acc_lo, _mm256_xor_pd(w, _mm256_castsi256_pd(sign_lo)));
      acc_hi = _mm256_add_pd(acc_hi, _mm256_xor_pd(w, _mm256_castsi256_pd(sign_hi)));
    }
    _mm256_storeu_pd(out.data() + k, acc_lo);
    _mm256_storeu_pd(out.data() + k + 4, acc_hi);
  }
  if (k < n) scalar::spin_sum(terms, first + static_cast<std::uint32_t>(k), out.subspan(k));
}

std::uint64_t count_disagreements(std::span<const std::uint64_t> a,
                                  std::span<const std::uint64_t> b) {
  const std::size_t words = a.size();
  std::size_t w = 0;
  __m256i total = _mm256_setzero_si256();
  while (w + 4 <= words) {
    // Byte counters saturate after 31 iterations of 8-bit sums; flush to
    // 64-bit lanes every block.
    __m256i bytes = _mm256_setzero_si256();
    const std::size_t block_end = std::min(words, w + 4 * 31);
    for (; w + 4 <= block_end; w += 4) {
      const __m256i x = _mm256_xor_si256(
          _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a.data() + w)),
          _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b.data() + w)));
      bytes = _mm256_add_epi8(bytes, popcount_bytes(x));
    }
    total = _mm256_add_epi64(total, _mm256_sad_epu8(bytes, _mm256_setzero_si256()));
  }
  alignas(32) std::uint64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), total);
  std::uint64_t count = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; w < words; ++w) count += std::popcount(a[w] ^ b[w]);
  return count;
}

}  // namespace wsmom::kernels::avx2

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

#include <gtest/gtest.h>

#include <bit>
#include <cstring>
#include <random>
#include <vector>

#include "wsmom/ising.hpp"
#include "wsmom/kernels.hpp"
#include "wsmom/source_matrix.hpp"

namespace wsmom::kernels {
namespace {

std::vector<SpinTerm> random_terms(std::mt19937_64& rng, int bits, int count) {
  std::uniform_real_distribution<double> w(-2.0, 2.0);
  std::vector<SpinTerm> terms;
  for (int t = 0; t < count; ++t)
    terms.push_back({static_cast<std::uint32_t>(rng()) & ((1U << bits) - 1U), w(rng)});
  return terms;
}

// Direct product of spins for one state.
double reference_spin_sum(const std::vector<SpinTerm>& terms, std::uint32_t state) {
  double acc = 0.0;
  for (const SpinTerm& t : terms) {
    double prod = 1.0;
    for (int b = 0; b < 32; ++b)
      if (t.mask >> b & 1U) prod *= (state >> b & 1U) ? 1.0 : -1.0;
    acc += t.weight * prod;
  }
  return acc;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

class IsaGuard {
 public:
  IsaGuard() : saved_(active_isa()) {}
  ~IsaGuard() { set_isa(saved_); }

 private:
  Isa saved_;
};

TEST(SpinSum, ScalarMatchesDirectProduct) {
  std::mt19937_64 rng(1);
  const auto terms = random_terms(rng, 9, 25);
  std::vector<double> out(512);
  scalar::spin_sum(terms, 0, out);
  for (std::uint32_t s = 0; s < 512; ++s) EXPECT_NEAR(out[s], reference_spin_sum(terms, s), 1e-12);
}

TEST(SpinSum, EmptyTermsGiveZero) {
  std::vector<double> out(7, 3.0);
  spin_sum({}, 5, out);
  for (double v : out) EXPECT_EQ(v, 0.0);
}

TEST(CountDisagreements, ScalarMatchesPopcount) {
  std::mt19937_64 rng(2);
  std::vector<std::uint64_t> a(37), b(37);
  for (auto& w : a) w = rng();
  for (auto& w : b) w = rng();
  std::uint64_t expected = 0;
  for (std::size_t i = 0; i < a.size(); ++i) expected += static_cast<std::uint64_t>(std::popcount(a[i] ^ b[i]));
  EXPECT_EQ(scalar::count_disagreements(a, b), expected);
}

#if defined(WSMOM_HAVE_AVX2)
TEST(Avx2, SpinSumBitIdenticalToScalar) {
  IsaGuard guard;
  if (!set_isa(Isa::kAvx2)) GTEST_SKIP() << "CPU lacks AVX2";
  std::mt19937_64 rng(3);
  for (int bits : {1, 3, 8, 11}) {
    for (std::uint32_t first : {0U, 1U, 5U, 13U}) {
      const auto terms = random_terms(rng, bits, 40);
      // Lengths that are not multiples of the vector width exercise the tail.
      for (std::size_t len : {std::size_t{1}, std::size_t{7}, std::size_t{8}, std::size_t{29}, std::size_t{1000}}) {
        std::vector<double> s(len), v(len);
        scalar::spin_sum(terms, first, s);
        avx2::spin_sum(terms, first, v);
        EXPECT_TRUE(bit_equal(s, v)) << "bits " << bits << " first " << first << " len " << len;
      }
    }
  }
}

TEST(Avx2, CountDisagreementsEqualsScalar) {
  IsaGuard guard;
  if (!set_isa(Isa::kAvx2)) GTEST_SKIP() << "CPU lacks AVX2";
  std::mt19937_64 rng(4);
  // 31-iteration flush boundary of the byte accumulators sits at 124 words.
  for (std::size_t words : {0UL, 1UL, 3UL, 4UL, 5UL, 123UL, 124UL, 125UL, 128UL, 1000UL, 4099UL}) {
    std::vector<std::uint64_t> a(words), b(words);
    for (auto& w : a) w = rng();
    for (auto& w : b) w = rng();
    EXPECT_EQ(avx2::count_disagreements(a, b), scalar::count_disagreements(a, b)) << words;
    std::vector<std::uint64_t> ones(words, ~0ULL), zeros(words, 0);
    EXPECT_EQ(avx2::count_disagreements(ones, zeros), 64 * words);
  }
}
#endif

#if defined(WSMOM_HAVE_NEON)
TEST(Neon, SpinSumBitIdenticalToScalar) {
  std::mt19937_64 rng(3);
  const auto terms = random_terms(rng, 10, 40);
  std::vector<double> s(1001), v(1001);
  scalar::spin_sum(terms, 3, s);
  neon::spin_sum(terms, 3, v);
  EXPECT_TRUE(bit_equal(s, v));
}

TEST(Neon, CountDisagreementsEqualsScalar) {
  std::mt19937_64 rng(4);
  std::vector<std::uint64_t> a(1001), b(1001);
  for (auto& w : a) w = rng();
  for (auto& w : b) w = rng();
  EXPECT_EQ(neon::count_disagreements(a, b), scalar::count_disagreements(a, b));
}
#endif

TEST(Dispatch, ScalarAlwaysSelectable) {
  IsaGuard guard;
  EXPECT_TRUE(set_isa(Isa::kScalar));
  EXPECT_EQ(active_isa(), Isa::kScalar);
  EXPECT_EQ(isa_name(Isa::kScalar), "scalar");
}

TEST(Dispatch, LibraryResultsIndependentOfIsa) {
  IsaGuard guard;
  const IsingModel model = calibrate(synthetic_accuracies(), synthetic_edges(3));
  const SourceMatrix data = sample(model, 5000, 8);
  ASSERT_TRUE(set_isa(Isa::kScalar));
  const Eigen::MatrixXd ref = data.pairwise_moments();
  const IsingModel ref_model(model.m(), model.theta_y(), model.theta(), model.edges());
  ASSERT_TRUE(set_isa(detected_isa()));
  const Eigen::MatrixXd simd = data.pairwise_moments();
  const IsingModel simd_model(model.m(), model.theta_y(), model.theta(), model.edges());
  EXPECT_EQ((ref - simd).cwiseAbs().maxCoeff(), 0.0);
  for (std::size_t s = 0; s < ref_model.state_count(); ++s) EXPECT_EQ(ref_model.joint()[s], simd_model.joint()[s]);
}

}  // namespace
}  // namespace wsmom::kernels

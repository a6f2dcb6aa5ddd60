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

#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

#include "wsmom/errors.hpp"
#include "wsmom/source_matrix.hpp"

namespace wsmom {
namespace {

SourceMatrix random_matrix(std::size_t n, int m, bool labels, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int> v(n * static_cast<std::size_t>(m));
  for (int& x : v) x = rng() % 2 ? 1 : -1;
  std::vector<int> y;
  if (labels) {
    y.resize(n);
    for (int& x : y) x = rng() % 2 ? 1 : -1;
  }
  return SourceMatrix::from_values(v, n, m, y);
}

void expect_same(const SourceMatrix& a, const SourceMatrix& b) {
  ASSERT_EQ(a.n(), b.n());
  ASSERT_EQ(a.m(), b.m());
  ASSERT_EQ(a.has_labels(), b.has_labels());
  for (std::size_t r = 0; r < a.n(); ++r) {
    for (int c = 0; c < a.m(); ++c) ASSERT_EQ(a.value(r, c), b.value(r, c));
    if (a.has_labels()) ASSERT_EQ(a.label(r), b.label(r));
  }
}

TEST(SourceMatrix, ValuesAndStatesAgree) {
  const std::vector<std::uint32_t> states = {0b0000, 0b1011, 0b0110, 0b1111};
  const SourceMatrix d = SourceMatrix::from_states(states, 3, true);
  EXPECT_EQ(d.value(0, 0), -1);
  EXPECT_EQ(d.label(0), -1);
  EXPECT_EQ(d.value(1, 0), 1);
  EXPECT_EQ(d.value(1, 2), -1);
  EXPECT_EQ(d.label(1), 1);
  EXPECT_EQ(d.label(2), -1);
  const auto cfg = d.row_configurations();
  EXPECT_EQ(cfg, (std::vector<std::uint32_t>{0b000, 0b011, 0b110, 0b111}));
}

TEST(SourceMatrix, MomentsMatchNaiveSums) {
  for (std::size_t n : {1UL, 63UL, 64UL, 65UL, 1000UL}) {
    const SourceMatrix d = random_matrix(n, 5, true, n);
    const Eigen::MatrixXd mom = d.pairwise_moments();
    const auto lab = d.label_moments();
    for (int i = 0; i < 5; ++i) {
      double ly = 0.0;
      for (std::size_t r = 0; r < n; ++r) ly += d.value(r, i) * d.label(r);
      EXPECT_NEAR(lab[i], ly / static_cast<double>(n), 1e-15);
      EXPECT_EQ(mom(i, i), 1.0);
      for (int j = 0; j < 5; ++j) {
        double acc = 0.0;
        for (std::size_t r = 0; r < n; ++r) acc += d.value(r, i) * d.value(r, j);
        EXPECT_NEAR(mom(i, j), acc / static_cast<double>(n), 1e-15);
      }
    }
  }
}

TEST(SourceMatrix, RowSelection) {
  const SourceMatrix d = random_matrix(200, 4, true, 1);
  const std::vector<std::size_t> rows = {199, 0, 64, 64};
  const SourceMatrix s = d.select_rows(rows);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(s.label(k), d.label(rows[k]));
    for (int c = 0; c < 4; ++c) EXPECT_EQ(s.value(k, c), d.value(rows[k], c));
  }
  expect_same(d.head(70), d.select_rows(std::vector<std::size_t>{
                              0,  1,  2,  3,  4,  5,  6,  7,  8,  9,  10, 11, 12, 13, 14, 15, 16, 17,
                              18, 19, 20, 21, 22, 23, 24, 25, 26, 27, 28, 29, 30, 31, 32, 33, 34, 35,
                              36, 37, 38, 39, 40, 41, 42, 43, 44, 45, 46, 47, 48, 49, 50, 51, 52, 53,
                              54, 55, 56, 57, 58, 59, 60, 61, 62, 63, 64, 65, 66, 67, 68, 69}));
  EXPECT_FALSE(d.without_labels().has_labels());
  EXPECT_THROW(d.without_labels().label(0), ContractError);
  EXPECT_THROW(d.head(201), ContractError);
}

TEST(SourceMatrix, CsvRoundTrip) {
  for (bool labels : {true, false}) {
    const SourceMatrix d = random_matrix(130, 6, labels, 3);
    std::stringstream ss;
    write_csv(ss, d);
    expect_same(d, read_csv(ss));
  }
}

TEST(SourceMatrix, BinaryRoundTrip) {
  for (bool labels : {true, false}) {
    const SourceMatrix d = random_matrix(1000, 12, labels, 4);
    std::stringstream ss;
    write_binary(ss, d);
    expect_same(d, read_binary(ss));
  }
}

TEST(SourceMatrix, FileRoundTripByExtension) {
  const SourceMatrix d = random_matrix(77, 3, true, 5);
  const auto dir = std::filesystem::temp_directory_path();
  for (const char* name : {"wsmom_rt.csv", "wsmom_rt.wsmx"}) {
    const std::string path = (dir / name).string();
    save_source_matrix(path, d);
    expect_same(d, load_source_matrix(path));
    std::remove(path.c_str());
  }
}

TEST(SourceMatrix, RejectsMalformedInput) {
  std::stringstream bad_value("lf_0,lf_1,y\n1,0,1\n");
  EXPECT_THROW(read_csv(bad_value), FormatError);
  std::stringstream bad_fields("lf_0,lf_1\n1,1,1\n");
  EXPECT_THROW(read_csv(bad_fields), FormatError);
  std::stringstream no_rows("lf_0\n");
  EXPECT_THROW(read_csv(no_rows), FormatError);
  std::stringstream bad_magic("XXXX0000");
  EXPECT_THROW(read_binary(bad_magic), FormatError);
  const SourceMatrix d = random_matrix(10, 2, false, 6);
  std::stringstream trunc;
  write_binary(trunc, d);
  std::string bytes = trunc.str();
  std::stringstream cut(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(read_binary(cut), FormatError);
  EXPECT_THROW(load_source_matrix("/nonexistent/file.csv"), FormatError);
}

}  // namespace
}  // namespace wsmom

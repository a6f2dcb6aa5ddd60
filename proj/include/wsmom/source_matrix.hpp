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

#ifndef WSMOM_SOURCE_MATRIX_HPP
#define WSMOM_SOURCE_MATRIX_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace wsmom {

/// n x m matrix of votes in {-1, +1} with an optional label column, stored as
/// bit-packed columns (bit set = +1). Padding bits past n are always zero.
class SourceMatrix {
 public:
  SourceMatrix() = default;
  SourceMatrix(std::size_t n, int m, bool has_labels);

  /// Rows given as state indices (bit k = source k, bit m = label when
  /// labelled).
  static SourceMatrix from_states(std::span<const std::uint32_t> states, int m, bool has_labels);

  /// Row-major values in {-1, +1}; labels, if given, in {-1, +1}.
  static SourceMatrix from_values(std::span<const int> values, std::size_t n, int m,
                                  std::span<const int> labels = {});

  std::size_t n() const { return n_; }
  int m() const { return m_; }
  bool has_labels() const { return has_labels_; }
  std::size_t words_per_column() const { return words_; }

  int value(std::size_t row, int col) const;
  int label(std::size_t row) const;
  void set(std::size_t row, int col, int v);
  void set_label(std::size_t row, int y);

  std::span<const std::uint64_t> column(int col) const;
  std::span<const std::uint64_t> label_column() const;

  /// Source configuration of every row (bit k = source k). Requires m <= 31.
  std::vector<std::uint32_t> row_configurations() const;

  /// Empirical E[lambda_i lambda_j]; unit diagonal.
  Eigen::MatrixXd pairwise_moments() const;

  /// Empirical E[lambda_i y]. Requires labels.
  std::vector<double> label_moments() const;

  SourceMatrix select_rows(std::span<const std::size_t> rows) const;
  SourceMatrix head(std::size_t rows) const;
  SourceMatrix without_labels() const;

 private:
  std::size_t n_ = 0;
  int m_ = 0;
  bool has_labels_ = false;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;  // m columns, then the label column
};

/// CSV with header lf_0..lf_{m-1}[,y].
void write_csv(std::ostream& out, const SourceMatrix& data);
SourceMatrix read_csv(std::istream& in);

/// Binary layout, little-endian: "WSMX", u32 version, u64 n, u32 m,
/// u8 has_labels, then each packed column (label column last).
void write_binary(std::ostream& out, const SourceMatrix& data);
SourceMatrix read_binary(std::istream& in);

/// Picks the format from the extension (.wsmx is binary, anything else CSV).
SourceMatrix load_source_matrix(const std::string& path);
void save_source_matrix(const std::string& path, const SourceMatrix& data);

}  // namespace wsmom

#endif  // WSMOM_SOURCE_MATRIX_HPP

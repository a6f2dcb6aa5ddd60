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

#include "wsmom/source_matrix.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "wsmom/errors.hpp"
#include "wsmom/kernels.hpp"

namespace wsmom {
namespace {

constexpr char kMagic[4] = {'W', 'S', 'M', 'X'};
constexpr std::uint32_t kBinaryVersion = 1;

std::size_t words_for(std::size_t n) { return (n + 63) / 64; }

int parse_sign(const std::string& field, std::size_t line) {
  if (field == "1" || field == "+1") return 1;
  if (field == "-1") return -1;
  throw FormatError("line " + std::to_string(line) + ": expected -1 or 1, got '" + field + "'");
}

template <typename T>
void put(std::ostream& out, T v) {
  unsigned char buf[sizeof(T)];
  for (std::size_t b = 0; b < sizeof(T); ++b) buf[b] = static_cast<unsigned char>(v >> (8 * b));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) throw FormatError("truncated binary matrix");
  T v = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) v |= static_cast<T>(buf[b]) << (8 * b);
  return v;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

SourceMatrix::SourceMatrix(std::size_t n, int m, bool has_labels)
    : n_(n), m_(m), has_labels_(has_labels), words_(words_for(n)) {
  if (m < 1) throw ContractError("source matrix needs at least one column");
  bits_.assign(words_ * static_cast<std::size_t>(m + (has_labels ? 1 : 0)), 0);
}

SourceMatrix SourceMatrix::from_states(std::span<const std::uint32_t> states, int m,
                                       bool has_labels) {
  SourceMatrix out(states.size(), m, has_labels);
  const int cols = m + (has_labels ? 1 : 0);
  for (std::size_t r = 0; r < states.size(); ++r) {
    const std::uint64_t bit = std::uint64_t{1} << (r & 63);
    const std::size_t word = r >> 6;
    std::uint32_t s = states[r];
    while (s != 0) {
      const int c = std::countr_zero(s);
      s &= s - 1;
      if (c < cols) out.bits_[static_cast<std::size_t>(c) * out.words_ + word] |= bit;
    }
  }
  return out;
}

SourceMatrix SourceMatrix::from_values(std::span<const int> values, std::size_t n, int m,
                                       std::span<const int> labels) {
  if (values.size() != n * static_cast<std::size_t>(m))
    throw ContractError("value count does not match n * m");
  if (!labels.empty() && labels.size() != n) throw ContractError("label count does not match n");
  SourceMatrix out(n, m, !labels.empty());
  for (std::size_t r = 0; r < n; ++r) {
    for (int c = 0; c < m; ++c) out.set(r, c, values[r * static_cast<std::size_t>(m) + c]);
    if (!labels.empty()) out.set_label(r, labels[r]);
  }
  return out;
}

int SourceMatrix::value(std::size_t row, int col) const {
  const std::uint64_t w = bits_[static_cast<std::size_t>(col) * words_ + (row >> 6)];
  return ((w >> (row & 63)) & 1U) ? 1 : -1;
}

int SourceMatrix::label(std::size_t row) const {
  if (!has_labels_) throw ContractError("matrix has no labels");
  return value(row, m_);
}

void SourceMatrix::set(std::size_t row, int col, int v) {
  if (v != 1 && v != -1) throw ContractError("entries must be -1 or +1");
  std::uint64_t& w = bits_[static_cast<std::size_t>(col) * words_ + (row >> 6)];
  const std::uint64_t bit = std::uint64_t{1} << (row & 63);
  w = v > 0 ? (w | bit) : (w & ~bit);
}

void SourceMatrix::set_label(std::size_t row, int y) {
  if (!has_labels_) throw ContractError("matrix has no labels");
  set(row, m_, y);
}

std::span<const std::uint64_t> SourceMatrix::column(int col) const {
  return {bits_.data() + static_cast<std::size_t>(col) * words_, words_};
}

std::span<const std::uint64_t> SourceMatrix::label_column() const {
  if (!has_labels_) throw ContractError("matrix has no labels");
  return column(m_);
}

std::vector<std::uint32_t> SourceMatrix::row_configurations() const {
  if (m_ > 31) throw CapacityError("configurations need m <= 31");
  std::vector<std::uint32_t> out(n_, 0);
  for (int c = 0; c < m_; ++c) {
    const auto col = column(c);
    for (std::size_t w = 0; w < words_; ++w) {
      std::uint64_t word = col[w];
      while (word != 0) {
        const int b = std::countr_zero(word);
        word &= word - 1;
        out[w * 64 + static_cast<std::size_t>(b)] |= std::uint32_t{1} << c;
      }
    }
  }
  return out;
}

Eigen::MatrixXd SourceMatrix::pairwise_moments() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(m_, m_);
  if (n_ == 0) return out;
  const double n = static_cast<double>(n_);
  for (int i = 0; i < m_; ++i) {
    for (int j = i + 1; j < m_; ++j) {
      const auto diff = static_cast<double>(kernels::count_disagreements(column(i), column(j)));
      out(i, j) = out(j, i) = (n - 2.0 * diff) / n;
    }
  }
  return out;
}

std::vector<double> SourceMatrix::label_moments() const {
  if (!has_labels_) throw ContractError("labelled estimation requires a label column");
  std::vector<double> out(static_cast<std::size_t>(m_), 0.0);
  const double n = static_cast<double>(n_);
  for (int i = 0; i < m_; ++i) {
    const auto diff = static_cast<double>(kernels::count_disagreements(column(i), label_column()));
    out[static_cast<std::size_t>(i)] = (n - 2.0 * diff) / n;
  }
  return out;
}

SourceMatrix SourceMatrix::select_rows(std::span<const std::size_t> rows) const {
  SourceMatrix out(rows.size(), m_, has_labels_);
  const int cols = m_ + (has_labels_ ? 1 : 0);
  for (int c = 0; c < cols; ++c) {
    const std::uint64_t* src = bits_.data() + static_cast<std::size_t>(c) * words_;
    std::uint64_t* dst = out.bits_.data() + static_cast<std::size_t>(c) * out.words_;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::size_t from = rows[r];
      if (from >= n_) throw ContractError("row index out of range");
      if ((src[from >> 6] >> (from & 63)) & 1U) dst[r >> 6] |= std::uint64_t{1} << (r & 63);
    }
  }
  return out;
}

SourceMatrix SourceMatrix::head(std::size_t rows) const {
  if (rows > n_) throw ContractError("head larger than matrix");
  SourceMatrix out(rows, m_, has_labels_);
  const int cols = m_ + (has_labels_ ? 1 : 0);
  for (int c = 0; c < cols; ++c) {
    const std::uint64_t* src = bits_.data() + static_cast<std::size_t>(c) * words_;
    std::uint64_t* dst = out.bits_.data() + static_cast<std::size_t>(c) * out.words_;
    std::memcpy(dst, src, out.words_ * sizeof(std::uint64_t));
    if (rows % 64 != 0) dst[out.words_ - 1] &= (std::uint64_t{1} << (rows % 64)) - 1;
  }
  return out;
}

SourceMatrix SourceMatrix::without_labels() const {
  SourceMatrix out = *this;
  if (has_labels_) {
    out.has_labels_ = false;
    out.bits_.resize(words_ * static_cast<std::size_t>(m_));
  }
  return out;
}

void write_csv(std::ostream& out, const SourceMatrix& data) {
  for (int c = 0; c < data.m(); ++c) out << (c ? "," : "") << "lf_" << c;
  if (data.has_labels()) out << ",y";
  out << '\n';
  for (std::size_t r = 0; r < data.n(); ++r) {
    for (int c = 0; c < data.m(); ++c) out << (c ? "," : "") << data.value(r, c);
    if (data.has_labels()) out << ',' << data.label(r);
    out << '\n';
  }
}

SourceMatrix read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty source matrix CSV");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      header.push_back(field);
    }
  }
  const bool has_labels = !header.empty() && header.back() == "y";
  const int m = static_cast<int>(header.size()) - (has_labels ? 1 : 0);
  if (m < 1) throw FormatError("CSV header has no lf_ columns");
  for (int c = 0; c < m; ++c)
    if (header[static_cast<std::size_t>(c)] != "lf_" + std::to_string(c))
      throw FormatError("unexpected header column '" + header[static_cast<std::size_t>(c)] + "'");

  std::vector<int> values;
  std::vector<int> labels;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    int count = 0;
    while (std::getline(ss, field, ',')) {
      const int v = parse_sign(field, lineno);
      if (count < m)
        values.push_back(v);
      else
        labels.push_back(v);
      ++count;
    }
    if (count != static_cast<int>(header.size()))
      throw FormatError("line " + std::to_string(lineno) + ": wrong field count");
  }
  const std::size_t n = values.size() / static_cast<std::size_t>(m);
  if (n == 0) throw FormatError("source matrix CSV has no rows");
  return SourceMatrix::from_values(values, n, m, labels);
}

void write_binary(std::ostream& out, const SourceMatrix& data) {
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kBinaryVersion);
  put<std::uint64_t>(out, data.n());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(data.m()));
  put<std::uint8_t>(out, data.has_labels() ? 1 : 0);
  const int cols = data.m() + (data.has_labels() ? 1 : 0);
  for (int c = 0; c < cols; ++c)
    for (std::uint64_t w : data.column(c)) put<std::uint64_t>(out, w);
}

SourceMatrix read_binary(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw FormatError("bad magic");
  const auto version = get<std::uint32_t>(in);
  if (version != kBinaryVersion) throw FormatError("unsupported version " + std::to_string(version));
  const auto n = get<std::uint64_t>(in);
  const auto m = get<std::uint32_t>(in);
  const auto has_labels = get<std::uint8_t>(in) != 0;
  if (m == 0 || m > 4096) throw FormatError("implausible column count");
  SourceMatrix out(static_cast<std::size_t>(n), static_cast<int>(m), has_labels);
  const int cols = static_cast<int>(m) + (has_labels ? 1 : 0);
  for (int c = 0; c < cols; ++c) {
    for (std::size_t w = 0; w < out.words_per_column(); ++w) {
      auto word = get<std::uint64_t>(in);
      while (word != 0) {
        const int b = std::countr_zero(word);
        word &= word - 1;
        const std::size_t row = w * 64 + static_cast<std::size_t>(b);
        if (row >= n) throw FormatError("nonzero padding bits");
        if (c < static_cast<int>(m))
          out.set(row, c, 1);
        else
          out.set_label(row, 1);
      }
    }
  }
  return out;
}

SourceMatrix load_source_matrix(const std::string& path) {
  const bool binary = ends_with(path, ".wsmx");
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw FormatError("cannot open " + path);
  return binary ? read_binary(in) : read_csv(in);
}

void save_source_matrix(const std::string& path, const SourceMatrix& data) {
  const bool binary = ends_with(path, ".wsmx");
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw FormatError("cannot write " + path);
  if (binary)
    write_binary(out, data);
  else
    write_csv(out, data);
}

}  // namespace wsmom

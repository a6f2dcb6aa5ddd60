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

#ifndef WSMOM_WS_PIPELINE_HPP
#define WSMOM_WS_PIPELINE_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wsmom/estimators.hpp"
#include "wsmom/parallel.hpp"
#include "wsmom/source_matrix.hpp"

namespace wsmom {

/// Votes sentiment when its word is present and the opposite when absent.
struct KeywordSource {
  std::string word;
  int sentiment = 1;
};

/// love, like, good, great, best, excellent (+); terrible, worst, bad,
/// better, could, would (-).
std::vector<KeywordSource> default_keyword_roster();

struct Document {
  std::string id;
  std::string text;
  std::optional<int> label;
};

struct Corpus {
  std::vector<Document> documents;
  std::vector<std::size_t> train;  // indices into documents
  std::vector<std::size_t> test;
};

/// Lowercased maximal runs of ASCII letters and digits.
std::vector<std::string> tokenize(std::string_view text);

/// One row per document; labels are attached only when every document has one.
SourceMatrix apply_sources(const std::vector<Document>& docs, const std::vector<KeywordSource>& roster);
SourceMatrix apply_sources(const Corpus& corpus, const std::vector<std::size_t>& rows,
                           const std::vector<KeywordSource>& roster);

/// JSONL documents {id, text, label?} and a split manifest {train: [ids], test: [ids]}.
std::vector<Document> read_jsonl(std::istream& in);
void write_jsonl(std::ostream& out, const std::vector<Document>& docs);
Corpus load_corpus(const std::string& jsonl_path, const std::string& split_path);

struct IngestSummary {
  std::size_t documents = 0;
  std::size_t train = 0;
  std::size_t test = 0;
};

/// Converts an extracted review-dataset tree (train/{pos,neg}, test/{pos,neg},
/// one review per .txt file) into JSONL plus a seeded 40k/10k split (80/20
/// when the tree holds a different number of reviews).
IngestSummary ingest_review_tree(const std::string& root, const std::string& jsonl_path,
                                 const std::string& split_path, std::uint64_t seed);

/// Corpus whose keyword presence probabilities are known per class. presence
/// holds Pr(word present | Y = +1) and Pr(word present | Y = -1) per source.
struct KeywordModel {
  std::vector<KeywordSource> roster;
  std::vector<std::pair<double, double>> presence;
  double class_balance = 0.5;

  /// Pr(source votes +1 | Y = +1) and Pr(source votes +1 | Y = -1).
  std::pair<double, double> vote_plus(std::size_t i) const;
};

KeywordModel default_keyword_model();
Corpus synthetic_keyword_corpus(const KeywordModel& model, std::size_t n_train, std::size_t n_test, std::uint64_t seed);

struct CaseStudyConfig {
  std::vector<std::size_t> n_grid = {1000, 5000, 10000, 20000, 40000};
  std::vector<std::size_t> n_labeled_grid = {80, 120, 200, 400};
  std::size_t n_unlabeled = 40000;
  int trials = 10;
  double class_balance = 0.5;
  std::optional<double> gs_radius;  // defaults to 2m - 2 over the 2m parameters
  std::uint64_t seed = 20210419;
};

struct CaseStudyRow {
  std::string model;  // labeled, unlabeled, corrected, combined
  std::size_t n = 0;
  std::size_t n_labeled = 0;
  int trials = 0;
  double loss = 0.0;
  double f1 = 0.0;
  double f1_std = 0.0;
  double alpha = 0.0;  // combined rows only
};

std::vector<CaseStudyRow> run_case_study(const Corpus& corpus, const std::vector<KeywordSource>& roster,
                                         const CaseStudyConfig& config, const ParallelMap& pool = ParallelMap{});

void write_case_study_csv(std::ostream& out, const std::vector<CaseStudyRow>& rows);

}  // namespace wsmom

#endif  // WSMOM_WS_PIPELINE_HPP

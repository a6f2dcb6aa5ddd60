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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "wsmom/errors.hpp"
#include "wsmom/estimators.hpp"
#include "wsmom/ws_pipeline.hpp"

namespace fs = std::filesystem;

namespace wsmom {
namespace {

TEST(Tokenize, LowercaseAlnumRuns) {
  EXPECT_EQ(tokenize("I LOVED it, didn't love-it!! 10/10"),
            (std::vector<std::string>{"i", "loved", "it", "didn", "t", "love", "it", "10", "10"}));
  EXPECT_TRUE(tokenize("  ...  ").empty());
}

TEST(ApplySources, PresenceVotesSentiment) {
  const std::vector<KeywordSource> roster = {{"good", 1}, {"bad", -1}};
  const std::vector<Document> docs = {{"a", "Good movie", 1}, {"b", "so BAD", -1}, {"c", "good and bad", 1}};
  const SourceMatrix m = apply_sources(docs, roster);
  ASSERT_TRUE(m.has_labels());
  EXPECT_EQ(m.value(0, 0), 1);
  EXPECT_EQ(m.value(0, 1), 1);  // "bad" absent votes +1
  EXPECT_EQ(m.value(1, 0), -1);
  EXPECT_EQ(m.value(1, 1), -1);
  EXPECT_EQ(m.value(2, 1), -1);
  EXPECT_EQ(m.label(1), -1);
  const std::vector<Document> unlabeled = {{"a", "good", 1}, {"b", "bad", std::nullopt}};
  EXPECT_FALSE(apply_sources(unlabeled, roster).has_labels());
  EXPECT_THROW(apply_sources(docs, {}), ContractError);
}

TEST(Jsonl, RoundTripAndErrors) {
  const std::vector<Document> docs = {{"x1", "text \"quoted\"\n", 1}, {"x2", "plain", std::nullopt}};
  std::stringstream ss;
  write_jsonl(ss, docs);
  const auto back = read_jsonl(ss);
  ASSERT_EQ(back.size(), 2U);
  EXPECT_EQ(back[0].text, docs[0].text);
  EXPECT_EQ(*back[0].label, 1);
  EXPECT_FALSE(back[1].label.has_value());
  std::stringstream dup("{\"id\":\"a\",\"text\":\"\"}\n{\"id\":\"a\",\"text\":\"\"}\n");
  EXPECT_THROW(read_jsonl(dup), FormatError);
  std::stringstream bad_label("{\"id\":\"a\",\"text\":\"\",\"label\":0}\n");
  EXPECT_THROW(read_jsonl(bad_label), FormatError);
  std::stringstream broken("{\"id\":");
  EXPECT_THROW(read_jsonl(broken), FormatError);
}

TEST(Corpus, MissingFilesNameTheRemedy) {
  try {
    load_corpus("/nonexistent/docs.jsonl", "/nonexistent/split.json");
    FAIL();
  } catch (const CorpusMissingError& e) {
    EXPECT_NE(std::string(e.what()).find("ws ingest"), std::string::npos);
  }
}

TEST(Ingest, TreeToJsonlWithSeededSplit) {
  const fs::path root = fs::temp_directory_path() / "wsmom_ingest_tree";
  fs::remove_all(root);
  int id = 0;
  for (const char* split : {"train", "test"})
    for (const char* pol : {"pos", "neg"}) {
      fs::create_directories(root / split / pol);
      for (int k = 0; k < 5; ++k) std::ofstream(root / split / pol / (std::to_string(id++) + "_7.txt")) << "review " << pol;
    }
  const std::string docs = (root / "docs.jsonl").string();
  const std::string split = (root / "split.json").string();
  const IngestSummary s = ingest_review_tree(root.string(), docs, split, 5);
  EXPECT_EQ(s.documents, 20U);
  EXPECT_EQ(s.train, 16U);
  EXPECT_EQ(s.test, 4U);
  const Corpus c = load_corpus(docs, split);
  EXPECT_EQ(c.train.size(), 16U);
  std::vector<std::size_t> all = c.train;
  all.insert(all.end(), c.test.begin(), c.test.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);
  for (const auto& d : c.documents) EXPECT_EQ(*d.label, d.text == "review pos" ? 1 : -1);
  // Same seed, same split.
  const std::string split2 = (root / "split2.json").string();
  ingest_review_tree(root.string(), docs, split2, 5);
  EXPECT_EQ(load_corpus(docs, split2).test, c.test);
  EXPECT_THROW(ingest_review_tree((root / "none").string(), docs, split, 5), CorpusMissingError);
  fs::remove_all(root);
}

TEST(SyntheticCorpus, QuadraticTripletsRecoverGeneratingProbabilities) {
  const KeywordModel km = default_keyword_model();
  const Corpus c = synthetic_keyword_corpus(km, 50000, 10, 17);
  const SourceMatrix data = apply_sources(c, c.train, km.roster);
  for (Aggregation agg : {Aggregation::kMean, Aggregation::kMedian}) {
    const ClassConditionalEstimate est = estimate_quadratic_triplet(data.without_labels(), 0.5, agg, 3);
    for (std::size_t i = 0; i < km.roster.size(); ++i) {
      const auto [pos, neg] = km.vote_plus(i);
      EXPECT_NEAR(est.pr_plus_given_pos(static_cast<int>(i)), pos, 0.02) << km.roster[i].word;
      EXPECT_NEAR(est.pr_plus_given_neg(static_cast<int>(i)), neg, 0.02) << km.roster[i].word;
    }
  }
}

TEST(CaseStudy, RowsForEveryModel) {
  const Corpus c = synthetic_keyword_corpus(default_keyword_model(), 4000, 2000, 3);
  CaseStudyConfig cfg;
  cfg.n_grid = {1000, 4000};
  cfg.n_labeled_grid = {100, 200};
  cfg.n_unlabeled = 4000;
  cfg.trials = 3;
  const auto rows = run_case_study(c, default_keyword_roster(), cfg, ParallelMap(2));
  // Three fits per training size, then labeled/unlabeled/combined per n_L.
  ASSERT_EQ(rows.size(), 3U * 2U + 3U * 2U);
  for (const auto& r : rows) {
    EXPECT_GT(r.f1, 50.0) << r.model;
    EXPECT_LE(r.f1, 100.0);
    EXPECT_GT(r.loss, 0.0);
  }
  EXPECT_EQ(rows.back().model, "combined");
  std::ostringstream out;
  write_case_study_csv(out, rows);
  EXPECT_NE(out.str().find("corrected"), std::string::npos);
}

}  // namespace
}  // namespace wsmom

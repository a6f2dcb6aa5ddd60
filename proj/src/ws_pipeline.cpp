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

#include "wsmom/ws_pipeline.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "wsmom/errors.hpp"
#include "wsmom/label_model.hpp"
#include "wsmom/random.hpp"

namespace fs = std::filesystem;

namespace wsmom {
namespace {

constexpr const char* kCorpusHelp =
    "obtain the review corpus separately and convert it with `wsmom ws ingest --root <dir>`";

// First k entries of a seeded Fisher-Yates shuffle of `pool`.
std::vector<std::size_t> sample_without_replacement(std::vector<std::size_t> pool, std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  k = std::min(k, pool.size());
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + uniform_index(rng, pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

std::vector<KeywordSource> default_keyword_roster() {
  return {{"love", 1},     {"like", 1},  {"good", 1}, {"great", 1},  {"best", 1},  {"excellent", 1},
          {"terrible", -1}, {"worst", -1}, {"bad", -1}, {"better", -1}, {"could", -1}, {"would", -1}};
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) && c < 128) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

SourceMatrix apply_sources(const std::vector<Document>& docs, const std::vector<KeywordSource>& roster) {
  std::vector<std::size_t> rows(docs.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  Corpus view;
  view.documents = docs;
  return apply_sources(view, rows, roster);
}

SourceMatrix apply_sources(const Corpus& corpus, const std::vector<std::size_t>& rows,
                           const std::vector<KeywordSource>& roster) {
  if (roster.empty()) throw ContractError("keyword roster is empty");
  if (rows.empty()) throw ContractError("no documents to label");
  std::unordered_map<std::string, int> index;
  for (std::size_t k = 0; k < roster.size(); ++k) {
    if (roster[k].word.empty()) throw ContractError("keyword must be nonempty");
    if (roster[k].sentiment != 1 && roster[k].sentiment != -1) throw ContractError("sentiment must be +1 or -1");
    index.emplace(roster[k].word, static_cast<int>(k));
  }
  bool labelled = true;
  for (std::size_t r : rows) labelled = labelled && corpus.documents[r].label.has_value();
  const int m = static_cast<int>(roster.size());
  SourceMatrix out(rows.size(), m, labelled);
  std::vector<char> present(roster.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Document& doc = corpus.documents[rows[r]];
    std::fill(present.begin(), present.end(), 0);
    for (const auto& tok : tokenize(doc.text)) {
      const auto it = index.find(tok);
      if (it != index.end()) present[static_cast<std::size_t>(it->second)] = 1;
    }
    for (int k = 0; k < m; ++k) {
      const int s = roster[static_cast<std::size_t>(k)].sentiment;
      out.set(r, k, present[static_cast<std::size_t>(k)] ? s : -s);
    }
    if (labelled) out.set_label(r, *doc.label);
  }
  return out;
}

std::vector<Document> read_jsonl(std::istream& in) {
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Document d;
      d.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
      d.text = j.at("text").get<std::string>();
      if (j.contains("label") && !j.at("label").is_null()) {
        const int y = j.at("label").get<int>();
        if (y != 1 && y != -1) throw FormatError("line " + std::to_string(lineno) + ": label must be -1 or 1");
        d.label = y;
      }
      if (!seen.insert(d.id).second) throw FormatError("line " + std::to_string(lineno) + ": duplicate id " + d.id);
      docs.push_back(std::move(d));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return docs;
}

void write_jsonl(std::ostream& out, const std::vector<Document>& docs) {
  for (const auto& d : docs) {
    nlohmann::json j{{"id", d.id}, {"text", d.text}};
    if (d.label) j["label"] = *d.label;
    out << j.dump() << '\n';
  }
}

Corpus load_corpus(const std::string& jsonl_path, const std::string& split_path) {
  std::ifstream docs_in(jsonl_path);
  if (!docs_in) throw CorpusMissingError("cannot open " + jsonl_path + "; " + kCorpusHelp);
  std::ifstream split_in(split_path);
  if (!split_in) throw CorpusMissingError("cannot open " + split_path + "; " + kCorpusHelp);
  Corpus c;
  c.documents = read_jsonl(docs_in);
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < c.documents.size(); ++i) by_id.emplace(c.documents[i].id, i);
  try {
    const auto j = nlohmann::json::parse(split_in);
    for (const char* part : {"train", "test"}) {
      auto& dest = std::string(part) == "train" ? c.train : c.test;
      for (const auto& id : j.at(part)) {
        const auto it = by_id.find(id.get<std::string>());
        if (it == by_id.end()) throw FormatError("split manifest names unknown id " + id.get<std::string>());
        dest.push_back(it->second);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("split manifest: ") + e.what());
  }
  return c;
}

IngestSummary ingest_review_tree(const std::string& root, const std::string& jsonl_path,
                                 const std::string& split_path, std::uint64_t seed) {
  std::vector<Document> docs;
  for (const char* split : {"train", "test"}) {
    for (const char* polarity : {"pos", "neg"}) {
      const fs::path dir = fs::path(root) / split / polarity;
      if (!fs::is_directory(dir)) continue;
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
      std::sort(files.begin(), files.end());
      for (const auto& f : files)
        docs.push_back({std::string(split) + "/" + polarity + "/" + f.stem().string(), read_file(f),
                        std::string(polarity) == "pos" ? 1 : -1});
    }
  }
  if (docs.empty())
    throw CorpusMissingError("no reviews found under " + root + " (expected train/pos, train/neg, test/pos, test/neg)");
  std::vector<std::size_t> order(docs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  order = sample_without_replacement(std::move(order), docs.size(), seed);
  const std::size_t n_train = docs.size() == 50000 ? 40000 : docs.size() * 4 / 5;

  std::ofstream out(jsonl_path);
  if (!out) throw FormatError("cannot write " + jsonl_path);
  write_jsonl(out, docs);
  nlohmann::json split{{"train", nlohmann::json::array()}, {"test", nlohmann::json::array()}, {"seed", seed}};
  for (std::size_t i = 0; i < order.size(); ++i) split[i < n_train ? "train" : "test"].push_back(docs[order[i]].id);
  std::ofstream split_out(split_path);
  if (!split_out) throw FormatError("cannot write " + split_path);
  split_out << split.dump() << '\n';
  return {docs.size(), n_train, docs.size() - n_train};
}

std::pair<double, double> KeywordModel::vote_plus(std::size_t i) const {
  const auto [pos, neg] = presence[i];
  if (roster[i].sentiment > 0) return {pos, neg};
  return {1.0 - pos, 1.0 - neg};
}

KeywordModel default_keyword_model() {
  KeywordModel km;
  km.roster = default_keyword_roster();
  km.presence = {{0.30, 0.15}, {0.50, 0.42}, {0.45, 0.38}, {0.40, 0.18}, {0.30, 0.18}, {0.12, 0.03},
                 {0.03, 0.12}, {0.02, 0.15}, {0.15, 0.45}, {0.18, 0.25}, {0.30, 0.38}, {0.40, 0.48}};
  return km;
}

Corpus synthetic_keyword_corpus(const KeywordModel& model, std::size_t n_train, std::size_t n_test,
                                 std::uint64_t seed) {
  static const char* kFiller[] = {"the", "movie", "film", "plot", "actor", "scene", "and", "it", "was", "a"};
  Rng rng(seed);
  Corpus c;
  const std::size_t total = n_train + n_test;
  c.documents.reserve(total);
  for (std::size_t d = 0; d < total; ++d) {
    const int y = uniform01(rng) < model.class_balance ? 1 : -1;
    std::string text;
    for (std::size_t f = 0; f < 4; ++f) text += std::string(kFiller[uniform_index(rng, 10)]) + " ";
    for (std::size_t k = 0; k < model.roster.size(); ++k) {
      const double p = y > 0 ? model.presence[k].first : model.presence[k].second;
      if (uniform01(rng) < p) text += (uniform01(rng) < 0.5 ? "" : "Very ") + model.roster[k].word + "! ";
    }
    c.documents.push_back({"doc" + std::to_string(d), text, y});
    (d < n_train ? c.train : c.test).push_back(d);
  }
  return c;
}

std::vector<CaseStudyRow> run_case_study(const Corpus& corpus, const std::vector<KeywordSource>& roster,
                                         const CaseStudyConfig& config, const ParallelMap& pool) {
  if (corpus.train.empty()) throw CorpusMissingError(std::string("corpus has no training split; ") + kCorpusHelp);
  if (corpus.test.empty()) throw CorpusMissingError(std::string("corpus has no test split; ") + kCorpusHelp);
  const SourceMatrix test = apply_sources(corpus, corpus.test, roster);
  if (!test.has_labels()) throw ContractError("test split must be labelled");
  const SourceMatrix train = apply_sources(corpus, corpus.train, roster);
  const int m = static_cast<int>(roster.size());
  const double p = config.class_balance;
  std::vector<std::size_t> all(train.n());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

  auto score = [&](const ClassConditionalEstimate& est) {
    const LabelModel lm(est, p, ConfigDistribution::fit(test, 0.0), InferenceMode::kNormalized);
    return std::pair<double, double>{cross_entropy(lm, test), 100.0 * f1_score(lm, test).f1};
  };

  struct Fit {
    const char* name;
    int kind;  // 0 labeled, 1 mean, 2 median
  };
  const Fit fits[] = {{"labeled", 0}, {"unlabeled", 1}, {"corrected", 2}};

  std::vector<CaseStudyRow> rows;
  for (std::size_t n_req : config.n_grid) {
    const std::size_t n = std::min(n_req, train.n());
    const int trials = n == train.n() ? 1 : config.trials;
    std::vector<std::array<std::pair<double, double>, 3>> results(static_cast<std::size_t>(trials));
    pool.run(static_cast<std::size_t>(trials), [&](std::size_t t) {
      const auto pick = sample_without_replacement(all, n, derive_seed(config.seed, t, n));
      const SourceMatrix data = train.select_rows(pick);
      for (const Fit& f : fits) {
        ClassConditionalEstimate est =
            f.kind == 0 ? estimate_class_conditional_labeled(data, p)
                        : estimate_quadratic_triplet(data.without_labels(), p,
                                                     f.kind == 1 ? Aggregation::kMean : Aggregation::kMedian,
                                                     derive_seed(config.seed, t, 7));
        results[t][static_cast<std::size_t>(f.kind)] = score(est);
      }
    });
    for (const Fit& f : fits) {
      std::vector<double> loss;
      std::vector<double> f1;
      for (const auto& r : results) {
        loss.push_back(r[static_cast<std::size_t>(f.kind)].first);
        f1.push_back(r[static_cast<std::size_t>(f.kind)].second);
      }
      rows.push_back({f.name, n, 0, trials, mean_of(loss), mean_of(f1), std_of(f1), 0.0});
    }
  }

  const std::size_t n_u = std::min(config.n_unlabeled, train.n());
  const SourceMatrix unl = train.select_rows(sample_without_replacement(all, n_u, derive_seed(config.seed, 0, 1)))
                               .without_labels();
  const ClassConditionalEstimate corrected =
      estimate_quadratic_triplet(unl, p, Aggregation::kMedian, derive_seed(config.seed, 0, 7));
  const auto unl_score = score(corrected);
  const double radius = config.gs_radius.value_or(2.0 * m - 2.0);
  for (std::size_t n_l : config.n_labeled_grid) {
    std::vector<std::array<double, 5>> results(static_cast<std::size_t>(config.trials));
    pool.run(results.size(), [&](std::size_t t) {
      const auto pick = sample_without_replacement(all, std::min(n_l, train.n()), derive_seed(config.seed, t, 2 + n_l));
      const SourceMatrix lab = train.select_rows(pick);
      const ClassConditionalEstimate labeled = estimate_class_conditional_labeled(lab, p);
      const double alpha = green_strawderman_alpha_class_conditional(corrected, lab, radius);
      const auto lab_score = score(labeled);
      const auto comb_score = score(combine_class_conditional(corrected, labeled, alpha));
      results[t] = {lab_score.first, lab_score.second, comb_score.first, comb_score.second, alpha};
    });
    std::vector<double> cols[5];
    for (const auto& r : results)
      for (std::size_t c = 0; c < 5; ++c) cols[c].push_back(r[c]);
    rows.push_back({"labeled", n_l, n_l, config.trials, mean_of(cols[0]), mean_of(cols[1]), std_of(cols[1]), 0.0});
    rows.push_back({"unlabeled", n_u, n_l, 1, unl_score.first, unl_score.second, 0.0, 1.0});
    rows.push_back({"combined", n_u, n_l, config.trials, mean_of(cols[2]), mean_of(cols[3]), std_of(cols[3]),
                    mean_of(cols[4])});
  }
  return rows;
}

void write_case_study_csv(std::ostream& out, const std::vector<CaseStudyRow>& rows) {
  out << "model,n,n_labeled,trials,loss,f1,f1_std,alpha\n" << std::setprecision(10);
  for (const auto& r : rows)
    out << r.model << ',' << r.n << ',' << r.n_labeled << ',' << r.trials << ',' << r.loss << ',' << r.f1 << ','
        << r.f1_std << ',' << r.alpha << '\n';
}

}  // namespace wsmom

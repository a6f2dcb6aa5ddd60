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

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wsmom/analysis.hpp"
#include "wsmom/errors.hpp"
#include "wsmom/estimators.hpp"
#include "wsmom/experiments.hpp"
#include "wsmom/ising.hpp"
#include "wsmom/label_model.hpp"
#include "wsmom/manifest.hpp"
#include "wsmom/parallel.hpp"
#include "wsmom/source_matrix.hpp"
#include "wsmom/ws_pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wsmom;

namespace {

constexpr std::uint64_t kDefaultSeed = 20210419;

struct Globals {
  std::uint64_t seed = kDefaultSeed;
  unsigned jobs = 1;
  std::string format = "json";
  std::string manifest;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path);
  out << text;
}

std::vector<std::pair<int, int>> parse_edges(const std::string& spec) {
  std::vector<std::pair<int, int>> out;
  if (spec.empty()) return out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) throw ContractError("edge '" + item + "' must look like i-j");
    try {
      out.emplace_back(std::stoi(item.substr(0, dash)), std::stoi(item.substr(dash + 1)));
    } catch (const std::exception&) {
      throw ContractError("edge '" + item + "' must look like i-j");
    }
  }
  return out;
}

// Flat key/value rendering of a JSON object for --format csv.
std::string json_as_csv(const json& j) {
  std::ostringstream out;
  out << "key,value\n" << std::setprecision(17);
  std::function<void(const std::string&, const json&)> walk = [&](const std::string& prefix, const json& v) {
    if (v.is_object()) {
      for (const auto& [k, child] : v.items()) walk(prefix.empty() ? k : prefix + "." + k, child);
    } else if (v.is_array()) {
      for (std::size_t i = 0; i < v.size(); ++i) walk(prefix + "." + std::to_string(i), v[i]);
    } else if (v.is_string()) {
      out << prefix << ',' << v.get<std::string>() << '\n';
    } else {
      out << prefix << ',' << v.dump() << '\n';
    }
  };
  walk("", j);
  return out.str();
}

std::string render(const json& j, const std::string& format) {
  return format == "csv" ? json_as_csv(j) : j.dump(2) + "\n";
}

json accuracy_params(const AccuracyEstimate& est, double class_balance) {
  json j{{"kind", "accuracy"},
         {"method", to_string(est.method)},
         {"aggregation", to_string(est.aggregation)},
         {"a_hat", est.a_hat},
         {"class_balance", class_balance}};
  if (!est.triplets_used.empty()) {
    j["triplets_used"] = est.triplets_used;
    j["triplets_degenerate"] = est.triplets_degenerate;
    j["triplets_excluded"] = est.triplets_excluded;
  }
  if (est.alpha) j["alpha"] = *est.alpha;
  if (est.r) j["r"] = *est.r;
  return j;
}

json class_conditional_params(const ClassConditionalEstimate& est) {
  std::vector<double> pos;
  std::vector<double> neg;
  for (std::size_t i = 0; i < est.mu.size(); ++i) {
    pos.push_back(est.pr_plus_given_pos(static_cast<int>(i)));
    neg.push_back(est.pr_plus_given_neg(static_cast<int>(i)));
  }
  json j{{"kind", "class_conditional"},
         {"aggregation", to_string(est.aggregation)},
         {"pr_plus_given_pos", pos},
         {"pr_plus_given_neg", neg},
         {"class_balance", est.class_balance}};
  if (!est.triplets_used.empty()) {
    j["triplets_used"] = est.triplets_used;
    j["triplets_skipped"] = est.triplets_skipped;
    j["tie_breaks"] = est.tie_breaks;
  }
  return j;
}

LabelModel label_model_from_params(const json& params, ConfigDistribution configs, InferenceMode mode) {
  try {
    const double p = params.at("class_balance").get<double>();
    if (params.at("kind") == "class_conditional") {
      const auto est = class_conditional_from(params.at("pr_plus_given_pos").get<std::vector<double>>(),
                                              params.at("pr_plus_given_neg").get<std::vector<double>>(), p);
      return LabelModel(est, p, std::move(configs), mode);
    }
    AccuracyEstimate est;
    est.a_hat = params.at("a_hat").get<std::vector<double>>();
    return LabelModel(est, p, std::move(configs), mode);
  } catch (const json::exception& e) {
    throw FormatError(std::string("parameter file: ") + e.what());
  }
}

InferenceMode parse_mode(const std::string& s) {
  return s == "empirical" ? InferenceMode::kEmpiricalDenominator : InferenceMode::kNormalized;
}

std::string manifest_path(const Globals& g, const std::string& output, bool output_is_dir) {
  if (!g.manifest.empty()) return g.manifest;
  if (output.empty() || output == "-") return "manifest.json";
  if (output_is_dir) return (fs::path(output) / "manifest.json").string();
  return output + ".manifest.json";
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct ExperimentFlags {
  std::string config_path;
  std::string out_dir = "results";
  std::optional<int> d;
  std::optional<int> trials;
  std::optional<double> eps;
  std::vector<std::size_t> n_grid;
  std::vector<std::string> estimators;
  std::string evaluation;

  void add_to(CLI::App* app) {
    app->add_option("--config", config_path, "Experiment config JSON; flags override its fields");
    app->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
    app->add_option("--d", d, "Number of dependency edges (0-5 for the default model)");
    app->add_option("--trials", trials, "Monte-Carlo trials per point");
    app->add_option("--eps", eps, "Per-edge epsilon");
    app->add_option("--n-grid", n_grid, "Sample sizes, comma separated")->delimiter(',');
    app->add_option("--estimators", estimators, "labeled, triplet-single, triplet-mean, triplet-median")
        ->delimiter(',');
    app->add_option("--evaluation", evaluation, "population or normalized")
        ->check(CLI::IsMember({"population", "normalized"}));
  }

  ExperimentConfig resolve(const Globals& g) const {
    ExperimentConfig c;
    if (!config_path.empty()) {
      try {
        c = ExperimentConfig::from_json(json::parse(slurp(config_path)));
      } catch (const json::exception& e) {
        throw FormatError(std::string("config: ") + e.what());
      }
    }
    c.root_seed = g.seed;
    if (d) c.d = *d;
    if (trials) c.trials = *trials;
    if (eps) c.eps = *eps;
    if (!n_grid.empty()) c.n_grid = n_grid;
    if (!estimators.empty()) {
      c.estimators.clear();
      for (const auto& e : estimators) c.estimators.push_back(parse_estimator(e));
    }
    if (!evaluation.empty())
      c.evaluation = evaluation == "normalized" ? Evaluation::kNormalized : Evaluation::kPopulation;
    c.output_dir = out_dir;
    c.validate();
    return c;
  }
};

void write_experiment_manifest(const Globals& g, const std::string& sub, const ExperimentConfig& c,
                               const std::string& csv_path, const Timer& timer) {
  RunManifest man;
  man.subcommand = sub;
  man.config = c.to_json();
  man.config["jobs"] = g.jobs;
  man.seed = g.seed;
  if (!c.output_dir.empty()) man.config.erase("output_dir");
  man.add_output(csv_path);
  man.wall_clock_seconds = timer.seconds();
  man.write(manifest_path(g, c.output_dir, true));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Method-of-moments weak supervision: estimation, inference, analysis and experiments", "wsmom"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(kVersion));
  Globals g;
  bool help_all = false;
  app.add_flag("--help-all", help_all, "Print help for every subcommand and exit");
  app.add_option("--seed", g.seed, "Root seed for all randomness")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--format", g.format, "Report format")
      ->capture_default_str()
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--manifest", g.manifest, "Manifest path (default derived from the output path)");

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Fit Ising potentials to accuracy and epsilon targets");
  std::vector<double> cal_acc;
  std::string cal_edges;
  std::optional<int> cal_d;
  double cal_eps = 0.1;
  double cal_balance = 0.5;
  std::string cal_out;
  bool cal_diag = false;
  cal->add_option("--accuracies", cal_acc, "Target E[lambda_i Y], comma separated (default: 10-source table)")
      ->delimiter(',');
  cal->add_option("--edges", cal_edges, "Dependency edges as i-j pairs, comma separated");
  cal->add_option("--d", cal_d, "Use the first d chained edges (0-1, 2-3, ...)");
  cal->add_option("--eps", cal_eps, "Target epsilon for every edge")->capture_default_str();
  cal->add_option("--class-balance", cal_balance, "Target Pr(Y = 1)")->capture_default_str();
  cal->add_option("--out", cal_out, "Model JSON path (stdout when omitted)");
  cal->add_flag("--diagnostics", cal_diag, "Also print exact diagnostics");

  // sample
  auto* smp = app.add_subcommand("sample", "Draw labelled rows from a model");
  std::string smp_model;
  std::size_t smp_n = 0;
  std::string smp_out;
  bool smp_nolabels = false;
  smp->add_option("--model", smp_model, "Model JSON")->required();
  smp->add_option("--n", smp_n, "Number of rows")->required()->check(CLI::PositiveNumber);
  smp->add_option("--out", smp_out, "Output path (.csv or .wsmx)")->required();
  smp->add_flag("--no-labels", smp_nolabels, "Drop the label column");

  // fit
  auto* fit = app.add_subcommand("fit", "Estimate source parameters");
  std::string fit_data;
  std::string fit_method = "triplet";
  std::string fit_agg = "mean";
  std::string fit_known;
  double fit_balance = 0.5;
  std::string fit_out;
  std::string fit_labeled;
  std::optional<double> fit_alpha;
  std::optional<double> fit_r;
  fit->add_option("--data", fit_data, "Source matrix (.csv or .wsmx)")->required();
  fit->add_option("--method", fit_method, "labeled, triplet, quadratic, combined-linear or combined-gs")
      ->capture_default_str()
      ->check(CLI::IsMember({"labeled", "triplet", "quadratic", "combined-linear", "combined-gs"}));
  fit->add_option("--agg", fit_agg, "Triplet aggregation: single, mean or median")
      ->capture_default_str()
      ->check(CLI::IsMember({"single", "mean", "median"}));
  fit->add_option("--known-edges", fit_known, "Known dependent pairs i-j to avoid in triplets");
  fit->add_option("--class-balance", fit_balance, "Known Pr(Y = 1)")->capture_default_str();
  fit->add_option("--labeled", fit_labeled, "Labelled matrix for combined methods");
  fit->add_option("--alpha", fit_alpha, "Weight on the unlabeled estimate for combined-linear");
  fit->add_option("--r", fit_r, "Shrinkage radius for combined-gs (default m - 2)");
  fit->add_option("--out", fit_out, "Parameter JSON path (stdout when omitted)");

  // infer
  auto* inf = app.add_subcommand("infer", "Produce soft labels from fitted parameters");
  std::string inf_params;
  std::string inf_data;
  std::string inf_mode = "normalized";
  double inf_smoothing = 0.0;
  std::string inf_out;
  inf->add_option("--params", inf_params, "Parameter JSON from fit")->required();
  inf->add_option("--data", inf_data, "Source matrix to label")->required();
  inf->add_option("--mode", inf_mode, "normalized or empirical denominator")
      ->capture_default_str()
      ->check(CLI::IsMember({"normalized", "empirical"}));
  inf->add_option("--smoothing", inf_smoothing, "Additive smoothing for the configuration distribution")
      ->capture_default_str();
  inf->add_option("--out", inf_out, "Soft-label CSV path (stdout when omitted)");

  // decompose
  auto* dec = app.add_subcommand("decompose", "Exact four-term split of the expected loss");
  std::string dec_model;
  std::string dec_data;
  std::string dec_params;
  std::string dec_method = "triplet";
  std::string dec_agg = "mean";
  double dec_smoothing = 1.0;
  std::string dec_out;
  dec->add_option("--model", dec_model, "True model JSON")->required();
  dec->add_option("--data", dec_data, "Sample defining the empirical configuration distribution")->required();
  dec->add_option("--params", dec_params, "Fitted parameters (default: fit on --data)");
  dec->add_option("--method", dec_method, "labeled or triplet when fitting on --data")
      ->capture_default_str()
      ->check(CLI::IsMember({"labeled", "triplet"}));
  dec->add_option("--agg", dec_agg, "Triplet aggregation when fitting on --data")
      ->capture_default_str()
      ->check(CLI::IsMember({"single", "mean", "median"}));
  dec->add_option("--smoothing", dec_smoothing, "Additive smoothing (must give full support)")
      ->capture_default_str();
  dec->add_option("--out", dec_out, "Report path (stdout when omitted)");

  // bounds
  auto* bnd = app.add_subcommand("bounds", "Evaluate the excess-risk bounds and value ratios");
  std::string bnd_model;
  double bnd_nu = 1000;
  double bnd_nl = 1000;
  std::optional<double> bnd_rho;
  int bnd_rho_trials = 100;
  std::string bnd_out;
  bnd->add_option("--model", bnd_model, "True model JSON")->required();
  bnd->add_option("--n-u", bnd_nu, "Unlabeled sample size")->capture_default_str();
  bnd->add_option("--n-l", bnd_nl, "Labelled sample size")->capture_default_str();
  bnd->add_option("--rho", bnd_rho, "Median-estimator MSE (estimated by Monte Carlo when omitted)");
  bnd->add_option("--rho-trials", bnd_rho_trials, "Trials for estimating rho")->capture_default_str();
  bnd->add_option("--out", bnd_out, "Report path (stdout when omitted)");

  // curves / dvr / combine
  auto* crv = app.add_subcommand("curves", "Expected excess error against sample size");
  ExperimentFlags crv_flags;
  crv_flags.add_to(crv);

  auto* dvr = app.add_subcommand("dvr", "Data value ratio of unlabeled estimators");
  ExperimentFlags dvr_flags;
  dvr_flags.add_to(dvr);

  auto* cmb = app.add_subcommand("combine", "Combined-estimator sweep over labelled sample sizes");
  ExperimentFlags cmb_flags;
  cmb_flags.add_to(cmb);
  std::optional<std::size_t> cmb_nu;
  std::vector<std::size_t> cmb_nl;
  std::optional<double> cmb_alpha;
  std::string cmb_unl;
  cmb->add_option("--n-u", cmb_nu, "Unlabeled sample size");
  cmb->add_option("--n-l-grid", cmb_nl, "Labelled sample sizes, comma separated")->delimiter(',');
  cmb->add_option("--alpha", cmb_alpha, "Also report this fixed weight");
  cmb->add_option("--unlabeled-estimator", cmb_unl, "triplet-single, triplet-mean or triplet-median");

  // ws
  auto* ws = app.add_subcommand("ws", "Keyword weak-supervision pipeline");
  ws->require_subcommand(1);
  ws->fallthrough();
  auto* ing = ws->add_subcommand("ingest", "Convert a review tree into JSONL plus a split manifest");
  std::string ing_root;
  std::string ing_docs = "corpus.jsonl";
  std::string ing_split = "split.json";
  ing->add_option("--root", ing_root, "Directory holding train/{pos,neg} and test/{pos,neg}")->required();
  ing->add_option("--out-docs", ing_docs, "JSONL output")->capture_default_str();
  ing->add_option("--out-split", ing_split, "Split manifest output")->capture_default_str();

  auto* app_ws = ws->add_subcommand("apply", "Apply the keyword sources to documents");
  std::string apl_docs;
  std::string apl_split;
  std::string apl_part = "all";
  std::string apl_out;
  app_ws->add_option("--docs", apl_docs, "JSONL documents")->required();
  app_ws->add_option("--split", apl_split, "Split manifest (required for train or test)");
  app_ws->add_option("--part", apl_part, "all, train or test")
      ->capture_default_str()
      ->check(CLI::IsMember({"all", "train", "test"}));
  app_ws->add_option("--out", apl_out, "Source matrix output (.csv or .wsmx)")->required();

  auto* run = ws->add_subcommand("run", "Fit labeled, unlabeled and corrected models and score the test split");
  std::string run_docs;
  std::string run_split;
  bool run_synthetic = false;
  std::string run_out;
  CaseStudyConfig run_cfg;
  run->add_option("--docs", run_docs, "JSONL documents");
  run->add_option("--split", run_split, "Split manifest");
  run->add_flag("--synthetic", run_synthetic, "Use a generated keyword corpus with known parameters");
  run->add_option("--n-grid", run_cfg.n_grid, "Training sizes, comma separated")->delimiter(',')->capture_default_str();
  run->add_option("--n-l-grid", run_cfg.n_labeled_grid, "Labelled sizes for the combined model")
      ->delimiter(',')
      ->capture_default_str();
  run->add_option("--n-u", run_cfg.n_unlabeled, "Unlabeled size for the combined model")->capture_default_str();
  run->add_option("--trials", run_cfg.trials, "Resamples per size")->capture_default_str();
  run->add_option("--out", run_out, "Metrics CSV (stdout when omitted)");

  if (argc >= 2 && std::string(argv[1]) == "--help-all") {
    std::cout << app.help();
    for (auto* sub : app.get_subcommands({})) {
      std::cout << "\n" << sub->help();
      for (auto* nested : sub->get_subcommands({})) std::cout << "\n" << nested->help();
    }
    return 0;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << " (run 'wsmom --help-all' for every flag)\n";
    return 2;
  }

  const ParallelMap pool(g.jobs);
  const Timer timer;
  RunManifest man;
  man.seed = g.seed;
  try {
    if (*cal) {
      std::vector<double> acc = cal_acc.empty() ? synthetic_accuracies() : cal_acc;
      std::vector<EdgeTarget> edges;
      if (cal_d) {
        if (*cal_d < 0 || 2 * *cal_d > static_cast<int>(acc.size())) throw ContractError("--d too large");
        for (int k = 0; k < *cal_d; ++k) edges.push_back({2 * k, 2 * k + 1, cal_eps});
      }
      for (const auto& [i, j] : parse_edges(cal_edges)) edges.push_back({i, j, cal_eps});
      const IsingModel model = calibrate(acc, edges, cal_balance);
      std::string text = model_to_json(model) + "\n";
      spit(cal_out, text);
      if (cal_diag) {
        const ModelDiagnostics d = diagnostics(model);
        json dj{{"a", d.a}, {"a_min", d.a_min}, {"b_min", d.b_min}, {"a_bar_max", d.a_bar_max},
                {"eps_min", d.eps_min}, {"eps_max", d.eps_max}, {"class_balance", d.class_balance},
                {"H_cond", d.H_cond}, {"B_I", d.B_I}};
        std::cerr << render(dj, g.format);
      }
      man.subcommand = "calibrate";
      man.config = {{"accuracies", acc}, {"edges", cal_edges}, {"d", cal_d ? *cal_d : 0}, {"eps", cal_eps},
                    {"class_balance", cal_balance}};
      if (!cal_out.empty()) man.add_output(cal_out);
      man.wall_clock_seconds = timer.seconds();
      man.write(manifest_path(g, cal_out, false));
    } else if (*smp) {
      const IsingModel model = model_from_json(slurp(smp_model));
      SourceMatrix data = sample(model, smp_n, g.seed);
      if (smp_nolabels) data = data.without_labels();
      save_source_matrix(smp_out, data);
      man.subcommand = "sample";
      man.config = {{"n", smp_n}, {"labels", !smp_nolabels}};
      man.add_input(smp_model);
      man.add_output(smp_out);
      man.wall_clock_seconds = timer.seconds();
      man.write(manifest_path(g, smp_out, false));
    } else if (*fit) {
      const SourceMatrix data = load_source_matrix(fit_data);
      json params;
      std::vector<KnownEdge> known;
      for (const auto& e : parse_edges(fit_known)) known.push_back(e);
      if (fit_method == "labeled") {
        params = accuracy_params(estimate_labeled(data), fit_balance);
      } else if (fit_method == "triplet") {
        params = accuracy_params(estimate_triplet(data, parse_aggregation(fit_agg), g.seed, known), fit_balance);
      } else if (fit_method == "quadratic") {
        params = class_conditional_params(
            estimate_quadratic_triplet(data, fit_balance, parse_aggregation(fit_agg), g.seed));
      } else {
        if (fit_labeled.empty()) throw ContractError("combined methods need --labeled");
        const SourceMatrix labeled = load_source_matrix(fit_labeled);
        const AccuracyEstimate a_u = estimate_triplet(data, parse_aggregation(fit_agg), g.seed, known);
        if (fit_method == "combined-linear") {
          if (!fit_alpha) throw ContractError("combined-linear needs --alpha");
          params = accuracy_params(combine_linear(a_u, estimate_labeled(labeled), *fit_alpha), fit_balance);
        } else {
          params = accuracy_params(combine_green_strawderman(a_u, labeled, fit_r), fit_balance);
        }
        man.add_input(fit_labeled);
      }
      spit(fit_out, params.dump(2) + "\n");
      man.subcommand = "fit";
      man.config = {{"method", fit_method}, {"agg", fit_agg}, {"known_edges", fit_known},
                    {"class_balance", fit_balance}};
      if (fit_alpha) man.config["alpha"] = *fit_alpha;
      if (fit_r) man.config["r"] = *fit_r;
      man.add_input(fit_data);
      if (!fit_out.empty()) man.add_output(fit_out);
      man.wall_clock_seconds = timer.seconds();
      man.write(manifest_path(g, fit_out, false));
    } else if (*inf) {
      const json params = json::parse(slurp(inf_params));
      const SourceMatrix data = load_source_matrix(inf_data);
      const LabelModel lm =
          label_model_from_params(params, ConfigDistribution::fit(data, inf_smoothing), parse_mode(inf_mode));
      std::ostringstream csv;
      write_soft_labels(csv, lm, data);
      spit(inf_out, csv.str());
      if (data.has_labels()) {
        const F1Report f1 = f1_score(lm, data);
        std::cerr << render(json{{"cross_entropy", cross_entropy(lm, data)}, {"f1", f1.f1},
                                 {"precision", f1.precision}, {"recall", f1.recall}},
                            g.format);
      }
      man.subcommand = "infer";
      man.config = {{"mode", inf_mode}, {"smoothing", inf_smoothing}};
      man.add_input(inf_params);
      man.add_input(inf_data);
      if (!inf_out.empty()) man.add_output(inf_out);
      man.wall_clock_seconds = timer.seconds();
      man.write(manifest_path(g, inf_out, false));
    } else if (*dec) {
      const IsingModel model = model_from_json(slurp(dec_model));
      const SourceMatrix data = load_source_matrix(dec_data);
      const ConfigDistribution configs = ConfigDistribution::fit(data, dec_smoothing);
      const double p = model.class_balance();
      json params;
      if (!dec_params.empty()) {
        params = json::parse(slurp(dec_params));
        params["class_balance"] = params.value("class_balance", p);
      } else if (dec_method == "labeled") {
        params = accuracy_params(estimate_labeled(data), p);
      } else {
        params = accuracy_params(estimate_triplet(data, parse_aggregation(dec_agg), g.seed), p);
      }
      const LabelModel lm = label_model_from_params(params, configs, InferenceMode::kEmpiricalDenominator);
      spit(dec_out, render(json::parse(to_json(decompose(model, lm))), g.format));
      man.subcommand = "decompose";
      man.config = {{"method", dec_method}, {"agg", dec_agg}, {"smoothing", dec_smoothing}};
      man.add_input(dec_model);
      man.add_input(dec_data);
      if (!dec_params.empty()) man.add_input(dec_params);
      if (!dec_out.empty()) man.add_output(dec_out);
      man.wall_clock_seconds = timer.seconds();
      man.write(manifest_path(g, dec_out, false));
    } else if (*bnd) {
      const IsingModel model = model_from_json(slurp(bnd_model));
      const ModelDiagnostics d = diagnostics(model);
      double rho = 0.0;
      if (bnd_rho) {
        rho = *bnd_rho;
      } else {
        rho = median_mse(model, static_cast<std::size_t>(bnd_nu), bnd_rho_trials, g.seed, pool).rho;
      }
      const BoundReport r = bound_report(d, static_cast<int>(d.eps.size()), bnd_nu, bnd_nl, rho);
      spit(bnd_out, render(json::parse(to_json(r)), g.format));
      man.subcommand = "bounds";
      man.config = {{"n_u", bnd_nu}, {"n_l", bnd_nl}, {"rho_trials", bnd_rho_trials}};
      if (bnd_rho) man.config["rho"] = *bnd_rho;
      man.add_input(bnd_model);
      if (!bnd_out.empty()) man.add_output(bnd_out);
      man.wall_clock_seconds = timer.seconds();
      man.write(manifest_path(g, bnd_out, false));
    } else if (*crv) {
      const ExperimentConfig c = crv_flags.resolve(g);
      fs::create_directories(c.output_dir);
      const Experiment exp(c);
      const auto points = excess_curves(exp, pool);
      const std::string path = (fs::path(c.output_dir) / "curves.csv").string();
      std::ofstream out(path);
      write_curves_csv(out, points);
      out.close();
      write_experiment_manifest(g, "curves", c, path, timer);
    } else if (*dvr) {
      ExperimentConfig c = dvr_flags.resolve(g);
      if (dvr_flags.estimators.empty()) c.estimators = {EstimatorKind::kTripletMean, EstimatorKind::kTripletMedian};
      fs::create_directories(c.output_dir);
      const Experiment exp(c);
      LabeledCurve curve(exp, pool);
      std::vector<DvrResult> rows;
      for (EstimatorKind k : c.estimators) {
        if (k == EstimatorKind::kLabeled) continue;
        for (std::size_t n : c.n_grid) rows.push_back(data_value_ratio(exp, n, k, curve, pool));
      }
      const std::string path = (fs::path(c.output_dir) / "dvr.csv").string();
      std::ofstream out(path);
      write_dvr_csv(out, rows);
      out.close();
      write_experiment_manifest(g, "dvr", c, path, timer);
    } else if (*cmb) {
      ExperimentConfig c = cmb_flags.resolve(g);
      if (cmb_nu) c.n_unlabeled = *cmb_nu;
      if (!cmb_nl.empty()) c.n_labeled_grid = cmb_nl;
      if (!cmb_unl.empty()) c.unlabeled_estimator = parse_estimator(cmb_unl);
      c.validate();
      fs::create_directories(c.output_dir);
      const Experiment exp(c);
      const auto rows = combined_sweep(exp, pool, cmb_alpha);
      const std::string path = (fs::path(c.output_dir) / "combined.csv").string();
      std::ofstream out(path);
      write_combined_csv(out, rows);
      out.close();
      write_experiment_manifest(g, "combine", c, path, timer);
    } else if (*ing) {
      const IngestSummary s = ingest_review_tree(ing_root, ing_docs, ing_split, g.seed);
      std::cout << render(json{{"documents", s.documents}, {"train", s.train}, {"test", s.test}}, g.format);
      man.subcommand = "ws ingest";
      man.config = {{"root", ing_root}};
      man.add_output(ing_docs);
      man.add_output(ing_split);
      man.wall_clock_seconds = timer.seconds();
      man.write(manifest_path(g, ing_docs, false));
    } else if (*app_ws) {
      std::vector<Document> docs;
      Corpus corpus;
      std::vector<std::size_t> rows;
      if (apl_part == "all") {
        std::ifstream in(apl_docs);
        if (!in) throw CorpusMissingError("cannot open " + apl_docs);
        corpus.documents = read_jsonl(in);
        for (std::size_t i = 0; i < corpus.documents.size(); ++i) rows.push_back(i);
      } else {
        if (apl_split.empty()) throw ContractError("--part train/test needs --split");
        corpus = load_corpus(apl_docs, apl_split);
        rows = apl_part == "train" ? corpus.train : corpus.test;
      }
      save_source_matrix(apl_out, apply_sources(corpus, rows, default_keyword_roster()));
      man.subcommand = "ws apply";
      man.config = {{"part", apl_part}};
      man.add_input(apl_docs);
      if (!apl_split.empty()) man.add_input(apl_split);
      man.add_output(apl_out);
      man.wall_clock_seconds = timer.seconds();
      man.write(manifest_path(g, apl_out, false));
    } else if (*run) {
      Corpus corpus;
      std::vector<KeywordSource> roster = default_keyword_roster();
      if (run_synthetic) {
        corpus = synthetic_keyword_corpus(default_keyword_model(), 40000, 10000, g.seed);
      } else {
        if (run_docs.empty() || run_split.empty())
          throw CorpusMissingError("ws run needs --docs and --split (or --synthetic); create them with 'wsmom ws ingest'");
        corpus = load_corpus(run_docs, run_split);
      }
      run_cfg.seed = g.seed;
      const auto rows = run_case_study(corpus, roster, run_cfg, pool);
      std::ostringstream csv;
      write_case_study_csv(csv, rows);
      spit(run_out, csv.str());
      man.subcommand = "ws run";
      man.config = {{"synthetic", run_synthetic}, {"n_grid", run_cfg.n_grid}, {"n_l_grid", run_cfg.n_labeled_grid},
                    {"n_u", run_cfg.n_unlabeled}, {"trials", run_cfg.trials}};
      if (!run_synthetic) {
        man.add_input(run_docs);
        man.add_input(run_split);
      }
      if (!run_out.empty()) man.add_output(run_out);
      man.wall_clock_seconds = timer.seconds();
      man.write(manifest_path(g, run_out, false));
    }
  } catch (const wsmom::Error& e) {
    std::cerr << "error: " << e.name() << ": " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "error: format_error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal_error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

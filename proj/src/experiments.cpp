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

#include "wsmom/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "wsmom/errors.hpp"
#include "wsmom/random.hpp"

namespace wsmom {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr std::uint64_t kSampleStream = 0;
constexpr std::uint64_t kUnlabeledStream = 1;
constexpr std::uint64_t kLabeledStream = 2;
constexpr std::uint64_t kEstimatorStream = 3;

std::vector<EdgeTarget> chained_edges(int m, int d, double eps) {
  if (d < 0 || 2 * d > m) throw ContractError("d must satisfy 0 <= 2d <= m");
  std::vector<EdgeTarget> out;
  for (int k = 0; k < d; ++k) out.push_back({2 * k, 2 * k + 1, eps});
  return out;
}

void require_increasing(const std::vector<std::size_t>& grid, const char* name) {
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid[i] < 1 || (i > 0 && grid[i] <= grid[i - 1]))
      throw ContractError(std::string(name) + " must be strictly increasing and positive");
}

}  // namespace

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kLabeled:
      return "labeled";
    case EstimatorKind::kTripletSingle:
      return "triplet-single";
    case EstimatorKind::kTripletMean:
      return "triplet-mean";
    case EstimatorKind::kTripletMedian:
      return "triplet-median";
  }
  return "unknown";
}

EstimatorKind parse_estimator(const std::string& name) {
  if (name == "labeled") return EstimatorKind::kLabeled;
  if (name == "triplet-single" || name == "single") return EstimatorKind::kTripletSingle;
  if (name == "triplet-mean" || name == "mean") return EstimatorKind::kTripletMean;
  if (name == "triplet-median" || name == "median") return EstimatorKind::kTripletMedian;
  throw ContractError("unknown estimator '" + name + "'");
}

void ExperimentConfig::validate() const {
  require_increasing(n_grid, "n grid");
  require_increasing(n_labeled_grid, "n_L grid");
  if (trials < 1) throw ContractError("trials must be >= 1");
  if (accuracies.size() < 3) throw ContractError("experiments need at least three sources");
  if (!(alpha_step > 0.0 && alpha_step <= 1.0)) throw ContractError("alpha step must lie in (0, 1]");
  if (n_unlabeled < 1) throw ContractError("n_U must be >= 1");
  if (unlabeled_estimator == EstimatorKind::kLabeled) throw ContractError("unlabeled estimator must be a triplet method");
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["accuracies"] = accuracies;
  j["d"] = d;
  j["eps"] = eps;
  j["class_balance"] = class_balance;
  j["n_grid"] = n_grid;
  std::vector<std::string> names;
  for (EstimatorKind k : estimators) names.push_back(wsmom::to_string(k));
  j["estimators"] = names;
  j["trials"] = trials;
  j["root_seed"] = root_seed;
  j["evaluation"] = evaluation == Evaluation::kPopulation ? "population" : "normalized";
  j["n_unlabeled"] = n_unlabeled;
  j["n_labeled_grid"] = n_labeled_grid;
  j["unlabeled_estimator"] = wsmom::to_string(unlabeled_estimator);
  j["alpha_step"] = alpha_step;
  j["gs_radius"] = gs_radius ? nlohmann::json(*gs_radius) : nlohmann::json(nullptr);
  j["output_dir"] = output_dir;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    if (j.contains("accuracies")) c.accuracies = j.at("accuracies").get<std::vector<double>>();
    if (j.contains("d")) c.d = j.at("d").get<int>();
    if (j.contains("eps")) c.eps = j.at("eps").get<double>();
    if (j.contains("class_balance")) c.class_balance = j.at("class_balance").get<double>();
    if (j.contains("n_grid")) c.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
    if (j.contains("estimators")) {
      c.estimators.clear();
      for (const auto& name : j.at("estimators")) c.estimators.push_back(parse_estimator(name.get<std::string>()));
    }
    if (j.contains("trials")) c.trials = j.at("trials").get<int>();
    if (j.contains("root_seed")) c.root_seed = j.at("root_seed").get<std::uint64_t>();
    if (j.contains("evaluation")) {
      const auto e = j.at("evaluation").get<std::string>();
      if (e == "population")
        c.evaluation = Evaluation::kPopulation;
      else if (e == "normalized")
        c.evaluation = Evaluation::kNormalized;
      else
        throw ContractError("evaluation must be 'population' or 'normalized'");
    }
    if (j.contains("n_unlabeled")) c.n_unlabeled = j.at("n_unlabeled").get<std::size_t>();
    if (j.contains("n_labeled_grid")) c.n_labeled_grid = j.at("n_labeled_grid").get<std::vector<std::size_t>>();
    if (j.contains("unlabeled_estimator"))
      c.unlabeled_estimator = parse_estimator(j.at("unlabeled_estimator").get<std::string>());
    if (j.contains("alpha_step")) c.alpha_step = j.at("alpha_step").get<double>();
    if (j.contains("gs_radius") && !j.at("gs_radius").is_null()) c.gs_radius = j.at("gs_radius").get<double>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("experiment config: ") + e.what());
  }
  return c;
}

MeanEstimate summarize(const std::vector<double>& values) {
  MeanEstimate out;
  double sum = 0.0;
  for (double v : values) {
    if (std::isnan(v)) {
      ++out.failures;
      continue;
    }
    sum += v;
    ++out.trials;
  }
  if (out.trials == 0) {
    out.mean = kNaN;
    out.std_error = kNaN;
    return out;
  }
  out.mean = sum / out.trials;
  double ss = 0.0;
  for (double v : values)
    if (!std::isnan(v)) ss += (v - out.mean) * (v - out.mean);
  out.std_error = out.trials > 1 ? std::sqrt(ss / (out.trials - 1) / out.trials) : 0.0;
  return out;
}

Experiment::Experiment(ExperimentConfig config) : config_(std::move(config)) {
  config_.validate();
  const int m = static_cast<int>(config_.accuracies.size());
  model_ = std::make_unique<IsingModel>(
      calibrate(config_.accuracies, chained_edges(m, config_.d, config_.eps), config_.class_balance));
  evaluator_ = std::make_unique<ExactEvaluator>(*model_);
  sampler_ = std::make_unique<JointSampler>(*model_);
}

std::uint64_t Experiment::trial_seed(int trial, std::uint64_t stream) const {
  return derive_seed(config_.root_seed, static_cast<std::uint64_t>(trial), stream);
}

double Experiment::excess(const AccuracyEstimate& est) const {
  if (config_.evaluation == Evaluation::kPopulation) return evaluator_->excess(evaluator_->population_model(est));
  const LabelModel normalized(est, evaluator_->diagnostics().class_balance,
                              ConfigDistribution::dense(model_->m(), evaluator_->source_marginal()),
                              InferenceMode::kNormalized);
  return evaluator_->excess(normalized);
}

AccuracyEstimate fit_estimator(EstimatorKind kind, const SourceMatrix& data, std::uint64_t seed) {
  switch (kind) {
    case EstimatorKind::kLabeled:
      return estimate_labeled(data);
    case EstimatorKind::kTripletSingle:
      return estimate_triplet(data, Aggregation::kSingle, seed);
    case EstimatorKind::kTripletMean:
      return estimate_triplet(data, Aggregation::kMean, seed);
    case EstimatorKind::kTripletMedian:
      return estimate_triplet(data, Aggregation::kMedian, seed);
  }
  throw ContractError("unknown estimator");
}

double Experiment::trial_excess(EstimatorKind kind, std::size_t n, int trial) const {
  const SourceMatrix data = sampler_->draw(n, trial_seed(trial, kSampleStream));
  try {
    return excess(fit_estimator(kind, data, trial_seed(trial, kEstimatorStream)));
  } catch (const EstimationError&) {
    return kNaN;
  } catch (const DegenerateTripletError&) {
    return kNaN;
  }
}

MeanEstimate Experiment::expected_excess(EstimatorKind kind, std::size_t n, const ParallelMap& pool) const {
  std::vector<double> values(static_cast<std::size_t>(config_.trials));
  pool.run(values.size(), [&](std::size_t t) { values[t] = trial_excess(kind, n, static_cast<int>(t)); });
  return summarize(values);
}

std::vector<CurvePoint> excess_curves(const Experiment& exp, const ParallelMap& pool) {
  const auto& cfg = exp.config();
  const std::size_t trials = static_cast<std::size_t>(cfg.trials);
  const std::size_t grid = cfg.n_grid.size();
  const std::size_t kinds = cfg.estimators.size();
  std::vector<double> values(kinds * grid * trials);
  pool.run(trials, [&](std::size_t t) {
    const int trial = static_cast<int>(t);
    const SourceMatrix full = exp.sampler().draw(cfg.n_grid.back(), exp.trial_seed(trial, kSampleStream));
    for (std::size_t g = 0; g < grid; ++g) {
      const SourceMatrix data = full.head(cfg.n_grid[g]);
      for (std::size_t k = 0; k < kinds; ++k) {
        double v = kNaN;
        try {
          v = exp.excess(fit_estimator(cfg.estimators[k], data, exp.trial_seed(trial, kEstimatorStream)));
        } catch (const EstimationError&) {
        } catch (const DegenerateTripletError&) {
        }
        values[(k * grid + g) * trials + t] = v;
      }
    }
  });
  std::vector<CurvePoint> out;
  for (std::size_t k = 0; k < kinds; ++k) {
    for (std::size_t g = 0; g < grid; ++g) {
      const auto first = values.begin() + static_cast<std::ptrdiff_t>((k * grid + g) * trials);
      out.push_back({cfg.estimators[k], cfg.n_grid[g], summarize(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(trials)))});
    }
  }
  return out;
}

std::vector<std::size_t> dvr_grid() {
  std::vector<std::size_t> grid;
  for (std::size_t n = 10; n < 100; ++n) grid.push_back(n);
  for (std::size_t n = 100; n < 1000; n += 2) grid.push_back(n);
  for (std::size_t n = 1000; n <= 5000; n += 10) grid.push_back(n);
  return grid;
}

// Running sums of lambda_i * y over a trial's sample stream; the labelled
// estimate at n is a prefix mean, identical to estimate_labeled on the first
// n rows of that stream.
struct LabeledCurve::Stream {
  Rng rng;
  std::vector<std::int64_t> sums;
  std::size_t count = 0;
};

LabeledCurve::LabeledCurve(const Experiment& exp, const ParallelMap& pool)
    : exp_(exp), pool_(pool), grid_(dvr_grid()), cache_(grid_.size()) {
  const int m = exp.model().m();
  for (int t = 0; t < exp.config().trials; ++t) {
    auto s = std::make_unique<Stream>();
    s->rng.seed(exp.trial_seed(t, kSampleStream));
    s->sums.assign(static_cast<std::size_t>(m), 0);
    streams_.push_back(std::move(s));
  }
}

LabeledCurve::~LabeledCurve() = default;

const MeanEstimate& LabeledCurve::at(std::size_t index) {
  if (index >= grid_.size()) throw ContractError("labelled grid index out of range");
  const int m = exp_.model().m();
  const std::uint32_t ybit = std::uint32_t{1} << m;
  for (std::size_t g = 0; g <= index; ++g) {
    if (cache_[g]) continue;
    const std::size_t n = grid_[g];
    std::vector<double> values(streams_.size());
    pool_.run(streams_.size(), [&](std::size_t t) {
      Stream& s = *streams_[t];
      while (s.count < n) {
        const std::uint32_t state = exp_.sampler().draw_state(s.rng);
        const int y = (state & ybit) ? 1 : -1;
        for (int i = 0; i < m; ++i) s.sums[static_cast<std::size_t>(i)] += ((state >> i) & 1U) ? y : -y;
        ++s.count;
      }
      AccuracyEstimate est;
      est.a_hat.resize(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i)
        est.a_hat[static_cast<std::size_t>(i)] = static_cast<double>(s.sums[static_cast<std::size_t>(i)]) / static_cast<double>(n);
      values[t] = exp_.excess(est);
    });
    cache_[g] = summarize(values);
  }
  return *cache_[index];
}

DvrResult data_value_ratio(const Experiment& exp, std::size_t n_u, EstimatorKind unlabeled, LabeledCurve& curve,
                           const ParallelMap& pool) {
  if (unlabeled == EstimatorKind::kLabeled) throw ContractError("data value ratio needs an unlabeled estimator");
  DvrResult r;
  r.estimator = unlabeled;
  r.n_u = n_u;
  r.unlabeled = exp.expected_excess(unlabeled, n_u, pool);
  const auto& grid = curve.grid();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const MeanEstimate& lab = curve.at(g);
    r.trace.emplace_back(grid[g], lab.mean);
    if (lab.mean <= r.unlabeled.mean) {
      r.f = grid[g];
      r.labeled_at_f = lab;
      r.V = static_cast<double>(n_u) / static_cast<double>(r.f);
      return r;
    }
  }
  r.lower_bounded = true;
  r.f = grid.back();
  r.labeled_at_f = curve.at(grid.size() - 1);
  r.V = static_cast<double>(n_u) / static_cast<double>(r.f);
  return r;
}

std::vector<CombinedRow> combined_sweep(const Experiment& exp, const ParallelMap& pool,
                                        std::optional<double> fixed_alpha) {
  const auto& cfg = exp.config();
  const std::size_t trials = static_cast<std::size_t>(cfg.trials);
  const std::size_t levels = cfg.n_labeled_grid.size();
  const std::size_t steps = static_cast<std::size_t>(std::llround(1.0 / cfg.alpha_step));
  const std::size_t alphas = steps + 1;
  const int m = exp.model().m();
  const double radius = cfg.gs_radius.value_or(static_cast<double>(m) - 2.0);

  // excess[(level * alphas + a) * trials + t]
  std::vector<double> excess(levels * alphas * trials, kNaN);
  std::vector<double> gs_excess(levels * trials, kNaN);
  std::vector<double> gs_alpha(levels * trials, kNaN);
  std::vector<double> fixed_excess(levels * trials, kNaN);

  pool.run(trials, [&](std::size_t t) {
    const int trial = static_cast<int>(t);
    const SourceMatrix unl = exp.sampler().draw(cfg.n_unlabeled, exp.trial_seed(trial, kUnlabeledStream)).without_labels();
    AccuracyEstimate a_u;
    try {
      a_u = fit_estimator(cfg.unlabeled_estimator, unl, exp.trial_seed(trial, kEstimatorStream));
    } catch (const EstimationError&) {
      return;
    }
    const SourceMatrix lab_full = exp.sampler().draw(cfg.n_labeled_grid.back(), exp.trial_seed(trial, kLabeledStream));
    for (std::size_t l = 0; l < levels; ++l) {
      const SourceMatrix lab = lab_full.head(cfg.n_labeled_grid[l]);
      const AccuracyEstimate a_l = estimate_labeled(lab);
      for (std::size_t a = 0; a < alphas; ++a) {
        const double alpha = a == steps ? 1.0 : static_cast<double>(a) / static_cast<double>(steps);
        excess[(l * alphas + a) * trials + t] = exp.excess(combine_linear(a_u, a_l, alpha));
      }
      try {
        const AccuracyEstimate gs =
            combine_green_strawderman(a_u, a_l, labeled_estimate_covariance(lab), radius);
        gs_excess[l * trials + t] = exp.excess(gs);
        gs_alpha[l * trials + t] = *gs.alpha;
      } catch (const NumericalError&) {
      }
      if (fixed_alpha) fixed_excess[l * trials + t] = exp.excess(combine_linear(a_u, a_l, *fixed_alpha));
    }
  });

  std::vector<CombinedRow> rows;
  for (std::size_t l = 0; l < levels; ++l) {
    auto column = [&](std::size_t a) {
      const auto first = excess.begin() + static_cast<std::ptrdiff_t>((l * alphas + a) * trials);
      return std::vector<double>(first, first + static_cast<std::ptrdiff_t>(trials));
    };
    CombinedRow row;
    row.n_l = cfg.n_labeled_grid[l];
    row.labeled = summarize(column(0));
    row.unlabeled = summarize(column(steps));
    std::size_t best = 0;
    MeanEstimate best_est = row.labeled;
    for (std::size_t a = 1; a < alphas; ++a) {
      const MeanEstimate e = summarize(column(a));
      if (e.mean < best_est.mean) {
        best = a;
        best_est = e;
      }
    }
    row.alpha_opt = best == steps ? 1.0 : static_cast<double>(best) / static_cast<double>(steps);
    row.combined = best_est;
    const std::vector<double> comb = column(best);
    const std::vector<double> rival = column(row.labeled.mean <= row.unlabeled.mean ? 0 : steps);
    std::vector<double> diff(trials);
    for (std::size_t t = 0; t < trials; ++t) diff[t] = comb[t] - rival[t];
    row.paired_stderr = summarize(diff).std_error;
    row.green_strawderman = summarize(std::vector<double>(gs_excess.begin() + static_cast<std::ptrdiff_t>(l * trials),
                                                          gs_excess.begin() + static_cast<std::ptrdiff_t>((l + 1) * trials)));
    row.gs_alpha_mean = summarize(std::vector<double>(gs_alpha.begin() + static_cast<std::ptrdiff_t>(l * trials),
                                                      gs_alpha.begin() + static_cast<std::ptrdiff_t>((l + 1) * trials)))
                            .mean;
    if (fixed_alpha) {
      row.fixed_alpha = fixed_alpha;
      row.fixed = summarize(std::vector<double>(fixed_excess.begin() + static_cast<std::ptrdiff_t>(l * trials),
                                                fixed_excess.begin() + static_cast<std::ptrdiff_t>((l + 1) * trials)));
    }
    rows.push_back(row);
  }
  return rows;
}

void write_curves_csv(std::ostream& out, const std::vector<CurvePoint>& points) {
  out << "estimator,n,mean_excess,stderr,trials,failures\n" << std::setprecision(17);
  for (const auto& p : points)
    out << to_string(p.estimator) << ',' << p.n << ',' << p.excess.mean << ',' << p.excess.std_error << ','
        << p.excess.trials << ',' << p.excess.failures << '\n';
}

void write_dvr_csv(std::ostream& out, const std::vector<DvrResult>& rows) {
  out << "estimator,n_U,f,V,lower_bounded,unlabeled_excess,unlabeled_stderr,labeled_excess_at_f,labeled_stderr_at_f\n"
      << std::setprecision(17);
  for (const auto& r : rows)
    out << to_string(r.estimator) << ',' << r.n_u << ',' << r.f << ',' << r.V << ',' << (r.lower_bounded ? 1 : 0)
        << ',' << r.unlabeled.mean << ',' << r.unlabeled.std_error << ',' << r.labeled_at_f.mean << ','
        << r.labeled_at_f.std_error << '\n';
}

void write_combined_csv(std::ostream& out, const std::vector<CombinedRow>& rows) {
  out << "n_L,labeled,labeled_stderr,unlabeled,unlabeled_stderr,combined,combined_stderr,alpha_opt,paired_stderr,"
         "green_strawderman,green_strawderman_stderr,gs_alpha_mean,fixed_alpha,fixed\n"
      << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.n_l << ',' << r.labeled.mean << ',' << r.labeled.std_error << ',' << r.unlabeled.mean << ','
        << r.unlabeled.std_error << ',' << r.combined.mean << ',' << r.combined.std_error << ',' << r.alpha_opt << ','
        << r.paired_stderr << ',' << r.green_strawderman.mean << ',' << r.green_strawderman.std_error << ','
        << r.gs_alpha_mean << ',';
    if (r.fixed_alpha)
      out << *r.fixed_alpha << ',' << r.fixed.mean;
    else
      out << ',';
    out << '\n';
  }
}

}  // namespace wsmom

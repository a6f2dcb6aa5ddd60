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

#ifndef WSMOM_EXPERIMENTS_HPP
#define WSMOM_EXPERIMENTS_HPP

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "wsmom/analysis.hpp"
#include "wsmom/estimators.hpp"
#include "wsmom/ising.hpp"
#include "wsmom/parallel.hpp"

namespace wsmom {

enum class EstimatorKind { kLabeled, kTripletSingle, kTripletMean, kTripletMedian };

std::string to_string(EstimatorKind kind);
EstimatorKind parse_estimator(const std::string& name);

/// How the fitted label model is scored. kPopulation uses the true Pr(lambda)
/// as denominator, so excess = B_I + parameter error exactly; kNormalized uses
/// the normalized posterior.
enum class Evaluation { kPopulation, kNormalized };

struct ExperimentConfig {
  std::vector<double> accuracies = synthetic_accuracies();
  int d = 0;
  double eps = 0.1;
  double class_balance = 0.5;
  std::vector<std::size_t> n_grid = {250, 500, 1000, 2000, 4000};
  std::vector<EstimatorKind> estimators = {EstimatorKind::kLabeled, EstimatorKind::kTripletMean,
                                           EstimatorKind::kTripletMedian};
  int trials = 1000;
  std::uint64_t root_seed = 20210419;
  Evaluation evaluation = Evaluation::kPopulation;
  // Combined-estimator sweep.
  std::size_t n_unlabeled = 1000;
  std::vector<std::size_t> n_labeled_grid = {50, 100, 200, 400};
  EstimatorKind unlabeled_estimator = EstimatorKind::kTripletMean;
  double alpha_step = 0.01;
  std::optional<double> gs_radius;  // defaults to m - 2
  std::string output_dir;

  void validate() const;
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
};

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int trials = 0;
  int failures = 0;
};

/// Mean and standard error of values, ignoring NaN entries (failed trials).
MeanEstimate summarize(const std::vector<double>& values);

/// Shared state for one experiment: the calibrated truth, its evaluator and
/// a sampler. Trial t of every sweep draws its rows from the stream seeded by
/// (root seed, t), so samples of different sizes within a trial are nested.
class Experiment {
 public:
  explicit Experiment(ExperimentConfig config);

  const ExperimentConfig& config() const { return config_; }
  const IsingModel& model() const { return *model_; }
  const ExactEvaluator& evaluator() const { return *evaluator_; }
  const JointSampler& sampler() const { return *sampler_; }

  /// Excess of a label model built from the accuracies.
  double excess(const AccuracyEstimate& est) const;

  /// Fits `kind` on the first n rows of trial t's stream; NaN on estimator
  /// failure.
  double trial_excess(EstimatorKind kind, std::size_t n, int trial) const;

  MeanEstimate expected_excess(EstimatorKind kind, std::size_t n, const ParallelMap& pool) const;

  std::uint64_t trial_seed(int trial, std::uint64_t stream) const;

 private:
  ExperimentConfig config_;
  std::unique_ptr<IsingModel> model_;
  std::unique_ptr<ExactEvaluator> evaluator_;
  std::unique_ptr<JointSampler> sampler_;
};

/// Fits an estimator on data (labels are used only by kLabeled).
AccuracyEstimate fit_estimator(EstimatorKind kind, const SourceMatrix& data, std::uint64_t seed);

struct CurvePoint {
  EstimatorKind estimator;
  std::size_t n;
  MeanEstimate excess;
};

std::vector<CurvePoint> excess_curves(const Experiment& exp, const ParallelMap& pool);

/// Labelled sample sizes searched for the data value ratio: 10..100 step 1,
/// 100..1000 step 2, 1000..5000 step 10.
std::vector<std::size_t> dvr_grid();

/// Labelled excess curve on dvr_grid(), evaluated lazily and memoized.
class LabeledCurve {
 public:
  LabeledCurve(const Experiment& exp, const ParallelMap& pool);
  ~LabeledCurve();
  const std::vector<std::size_t>& grid() const { return grid_; }
  const MeanEstimate& at(std::size_t index);

 private:
  struct Stream;
  const Experiment& exp_;
  const ParallelMap& pool_;
  std::vector<std::size_t> grid_;
  std::vector<std::optional<MeanEstimate>> cache_;
  std::vector<std::unique_ptr<Stream>> streams_;
};

struct DvrResult {
  EstimatorKind estimator;
  std::size_t n_u = 0;
  std::size_t f = 0;  // least qualifying n_L
  double V = 0.0;
  bool lower_bounded = false;  // no grid point qualified; V is a lower bound
  MeanEstimate unlabeled;
  MeanEstimate labeled_at_f;
  std::vector<std::pair<std::size_t, double>> trace;
};

DvrResult data_value_ratio(const Experiment& exp, std::size_t n_u, EstimatorKind unlabeled, LabeledCurve& curve,
                           const ParallelMap& pool);

struct CombinedRow {
  std::size_t n_l = 0;
  MeanEstimate labeled;
  MeanEstimate unlabeled;
  MeanEstimate combined;  // at the grid-optimal alpha
  double alpha_opt = 0.0;
  // Standard error of the per-trial difference combined - better individual.
  double paired_stderr = 0.0;
  MeanEstimate green_strawderman;
  double gs_alpha_mean = 0.0;
  std::optional<double> fixed_alpha;
  MeanEstimate fixed;
};

std::vector<CombinedRow> combined_sweep(const Experiment& exp, const ParallelMap& pool,
                                        std::optional<double> fixed_alpha = std::nullopt);

void write_curves_csv(std::ostream& out, const std::vector<CurvePoint>& points);
void write_dvr_csv(std::ostream& out, const std::vector<DvrResult>& rows);
void write_combined_csv(std::ostream& out, const std::vector<CombinedRow>& rows);

}  // namespace wsmom

#endif  // WSMOM_EXPERIMENTS_HPP

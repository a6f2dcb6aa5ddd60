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

#include <cmath>
#include <limits>
#include <sstream>

#include "wsmom/analysis.hpp"
#include "wsmom/errors.hpp"
#include "wsmom/experiments.hpp"

namespace wsmom {
namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.trials = 20;
  c.n_grid = {200, 800};
  c.d = 2;
  return c;
}

TEST(Summarize, MeanStderrAndFailures) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const MeanEstimate e = summarize({1.0, 2.0, 3.0, nan, 6.0});
  EXPECT_DOUBLE_EQ(e.mean, 3.0);
  EXPECT_NEAR(e.std_error, std::sqrt(14.0 / 3.0 / 4.0), 1e-15);
  EXPECT_EQ(e.trials, 4);
  EXPECT_EQ(e.failures, 1);
}

TEST(ExperimentConfig, JsonRoundTripAndValidation) {
  ExperimentConfig c = small_config();
  c.evaluation = Evaluation::kNormalized;
  c.gs_radius = 3.5;
  const ExperimentConfig back = ExperimentConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  ExperimentConfig bad = small_config();
  bad.trials = 0;
  EXPECT_THROW(bad.validate(), ContractError);
  bad = small_config();
  bad.n_grid = {500, 100};
  EXPECT_THROW(bad.validate(), ContractError);
  bad = small_config();
  bad.unlabeled_estimator = EstimatorKind::kLabeled;
  EXPECT_THROW(bad.validate(), ContractError);
  for (EstimatorKind k : {EstimatorKind::kLabeled, EstimatorKind::kTripletSingle, EstimatorKind::kTripletMean,
                          EstimatorKind::kTripletMedian})
    EXPECT_EQ(parse_estimator(to_string(k)), k);
  EXPECT_THROW(parse_estimator("em"), ContractError);
}

TEST(Experiment, SingleTrialEqualsDecompositionExcess) {
  ExperimentConfig c = small_config();
  c.trials = 1;
  const Experiment exp(c);
  const MeanEstimate e = exp.expected_excess(EstimatorKind::kTripletMean, 500, ParallelMap(1));
  const SourceMatrix data = exp.sampler().draw(500, exp.trial_seed(0, 0));
  const AccuracyEstimate est = fit_estimator(EstimatorKind::kTripletMean, data, exp.trial_seed(0, 3));
  const DecompositionReport r = exp.evaluator().decompose(exp.evaluator().population_model(est));
  EXPECT_NEAR(e.mean, r.independent_loss - exp.evaluator().diagnostics().H_cond, 1e-12);
  EXPECT_NEAR(e.mean, r.inference_bias + r.param_est_error, 1e-12);
}

TEST(Experiment, CurvesIndependentOfThreadCount) {
  const Experiment exp(small_config());
  const auto one = excess_curves(exp, ParallelMap(1));
  const auto four = excess_curves(exp, ParallelMap(4));
  ASSERT_EQ(one.size(), 6U);
  for (std::size_t k = 0; k < one.size(); ++k) {
    EXPECT_EQ(one[k].excess.mean, four[k].excess.mean);
    EXPECT_EQ(one[k].excess.std_error, four[k].excess.std_error);
  }
  // Curves reuse the per-trial stream, so they agree with expected_excess.
  const MeanEstimate direct = exp.expected_excess(EstimatorKind::kTripletMedian, 200, ParallelMap(2));
  for (const auto& p : one)
    if (p.estimator == EstimatorKind::kTripletMedian && p.n == 200) EXPECT_EQ(p.excess.mean, direct.mean);
}

TEST(Experiment, LabeledExcessNearHalfMOverN) {
  ExperimentConfig c;
  c.trials = 200;
  const Experiment exp(c);
  const double n = 1e5;
  const MeanEstimate e = exp.expected_excess(EstimatorKind::kLabeled, static_cast<std::size_t>(n), ParallelMap(4));
  EXPECT_NEAR(e.mean, 10.0 / (2.0 * n), 2.0 * e.std_error);
}

TEST(Experiment, NormalizedEvaluationAtTruthIsBias) {
  ExperimentConfig c = small_config();
  c.evaluation = Evaluation::kNormalized;
  const Experiment exp(c);
  AccuracyEstimate truth;
  truth.a_hat = exp.evaluator().diagnostics().a;
  // The normalized product form still pays for the unmodeled edges.
  EXPECT_GT(exp.excess(truth), 0.0);
  EXPECT_LE(exp.excess(truth), exp.evaluator().diagnostics().B_I + 1e-12);
}

TEST(DvrGrid, Shape) {
  const auto g = dvr_grid();
  EXPECT_EQ(g.front(), 10U);
  EXPECT_EQ(g.back(), 5000U);
  for (std::size_t k = 1; k < g.size(); ++k) EXPECT_LT(g[k - 1], g[k]);
  EXPECT_NE(std::find(g.begin(), g.end(), 99U), g.end());
  EXPECT_EQ(std::find(g.begin(), g.end(), 101U), g.end());
  EXPECT_NE(std::find(g.begin(), g.end(), 1010U), g.end());
}

TEST(DataValueRatio, RatioMatchesSearch) {
  ExperimentConfig c = small_config();
  c.trials = 50;
  c.d = 0;
  const Experiment exp(c);
  const ParallelMap pool(4);
  LabeledCurve curve(exp, pool);
  const DvrResult r = data_value_ratio(exp, 500, EstimatorKind::kTripletMean, curve, pool);
  ASSERT_FALSE(r.lower_bounded);
  EXPECT_DOUBLE_EQ(r.V, 500.0 / static_cast<double>(r.f));
  EXPECT_LE(r.labeled_at_f.mean, r.unlabeled.mean);
  for (const auto& [n, excess] : r.trace)
    if (n < r.f) EXPECT_GT(excess, r.unlabeled.mean);
}

TEST(Combined, SweepRowsAreConsistent) {
  ExperimentConfig c = small_config();
  c.trials = 30;
  c.n_labeled_grid = {50, 400};
  const Experiment exp(c);
  const auto rows = combined_sweep(exp, ParallelMap(4), 0.5);
  ASSERT_EQ(rows.size(), 2U);
  for (const auto& r : rows) {
    EXPECT_LE(r.combined.mean, std::min(r.labeled.mean, r.unlabeled.mean) + 1e-12);
    EXPECT_GE(r.alpha_opt, 0.0);
    EXPECT_LE(r.alpha_opt, 1.0);
    EXPECT_GE(r.gs_alpha_mean, 0.0);
    EXPECT_LE(r.gs_alpha_mean, 1.0);
    EXPECT_EQ(*r.fixed_alpha, 0.5);
  }
  std::ostringstream out;
  write_combined_csv(out, rows);
  EXPECT_EQ(out.str().rfind("n_L,labeled,", 0), 0U);
}

TEST(Csv, CurveHeader) {
  std::ostringstream out;
  write_curves_csv(out, {{EstimatorKind::kLabeled, 100, {0.5, 0.1, 10, 0}}});
  EXPECT_EQ(out.str(), "estimator,n,mean_excess,stderr,trials,failures\nlabeled,100,0.5,0.10000000000000001,10,0\n");
}

}  // namespace
}  // namespace wsmom

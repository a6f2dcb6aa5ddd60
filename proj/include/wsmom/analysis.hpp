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

#ifndef WSMOM_ANALYSIS_HPP
#define WSMOM_ANALYSIS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "wsmom/ising.hpp"
#include "wsmom/label_model.hpp"
#include "wsmom/parallel.hpp"

namespace wsmom {

/// Exact four-term split of the expected cross-entropy of a fitted label
/// model under the true distribution. `class_balance_term` is
/// KL(Pr(Y) || fitted balance) and vanishes when the balance is known.
struct DecompositionReport {
  double irreducible = 0.0;       // H(Y | lambda)
  double observable_noise = 0.0;  // KL(Pr(lambda) || fitted Pr(lambda))
  double inference_bias = 0.0;    // B_I
  double param_est_error = 0.0;   // sum_i E_Y KL(Pr(lambda_i|Y) || fitted)
  double class_balance_term = 0.0;
  double total = 0.0;
  double independent_loss = 0.0;
  double residual = 0.0;
};

/// Caches everything about the true model that loss evaluation needs, so
/// many fitted models can be scored against one truth.
class ExactEvaluator {
 public:
  explicit ExactEvaluator(const IsingModel& truth);

  const IsingModel& truth() const { return *truth_; }
  const ModelDiagnostics& diagnostics() const { return diag_; }
  const std::vector<double>& source_marginal() const { return marginal_; }
  /// Pr(lambda_i = +1 | Y = y), y index 0 for +1.
  double plus_given(int i, int y) const;

  DecompositionReport decompose(const LabelModel& fitted) const;

  /// Expected loss under the truth, using the same clamping as cross_entropy.
  double expected_loss(const LabelModel& fitted) const;
  double excess(const LabelModel& fitted) const { return expected_loss(fitted) - diag_.H_cond; }

  /// Empirical-denominator label model whose denominator is the true
  /// Pr(lambda); its excess is B_I plus the parameter error.
  LabelModel population_model(const ClassConditionalEstimate& params) const;
  LabelModel population_model(const AccuracyEstimate& accuracies) const;

 private:
  const IsingModel* truth_;
  ModelDiagnostics diag_;
  std::vector<double> marginal_;
  std::vector<double> plus_;  // [i * 2 + y index]
};

DecompositionReport decompose(const IsingModel& truth, const LabelModel& fitted);

struct GeneralizationError {
  double loss = 0.0;
  double excess = 0.0;
};
GeneralizationError exact_generalization_error(const IsingModel& truth, const LabelModel& fitted);

/// Constants of the unlabeled and median-corrected upper bounds.
struct BoundConstants {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double c4 = 0.0;
  double c_rho = 0.0;
};

struct BoundInputs {
  int m = 0;
  int d = 0;
  double eps_max = 0.0;
  double eps_min = 0.0;
  double a_min = 0.0;
  double a_max = 0.0;
  double b_min = 0.0;
  double a_bar_max = 0.0;
  double B_I = 0.0;
};

BoundInputs bound_inputs(const ModelDiagnostics& diag, int d);
BoundInputs bound_inputs(const ModelDiagnostics& diag);

/// Throws DegenerateConstantError when a_bar_max >= 1.
BoundConstants bound_constants(const BoundInputs& in);

/// m / (2 n_L) + B_I.
double bound_labeled(const ModelDiagnostics& diag, double n_l);

struct UnlabeledBound {
  double value = 0.0;
  double B_est = 0.0;
  BoundConstants constants;
};

/// eps_max (c1 d/m + c2/sqrt(n_U) + c3 d/(m n_U)) + c4 m/n_U + B_I.
UnlabeledBound bound_unlabeled(const ModelDiagnostics& diag, double n_u, int d);

/// ((m - 2d) d^2 eps_min^2 b_min^4) / (2 (m-1)^2 (m-2)^2) + B_I.
double bound_lower_unlabeled(const ModelDiagnostics& diag, int d);

/// Whether m > 5 and d < (m - 1)(m - 2) / 4.
bool median_conditions_hold(int m, int d);

struct MedianMseReport {
  double rho = 0.0;
  double bound = 0.0;  // c_rho m rho + B_I
  double c_rho = 0.0;
  bool applicable = true;
  int trials = 0;
  std::vector<double> per_source_mse;
};

/// Monte-Carlo max_i E[(a_M_i - a_i)^2] at n_U unlabeled rows.
MedianMseReport median_mse(const IsingModel& model, std::size_t n_u, int trials, std::uint64_t seed,
                           const ParallelMap& pool = ParallelMap{});

/// Same quantity with exact population moments (the infinite-sample limit).
MedianMseReport median_mse_population(const IsingModel& model);

enum class ValueSetting { kWellSpecified, kMisspecified, kCorrected };

/// Closed-form approximate data value ratio for one setting; rho is used
/// only by the corrected setting.
double approx_data_value_ratio(const BoundInputs& in, const BoundConstants& c, ValueSetting setting, double n_u,
                               double rho = 0.0);

/// Everything the bound evaluators produce, for serialization.
struct BoundReport {
  BoundInputs inputs;
  BoundConstants constants;
  double n_u = 0.0;
  double n_l = 0.0;
  double rho = 0.0;
  double R_L = 0.0;
  double R_U = 0.0;
  double R_M = 0.0;
  double B_est = 0.0;
  double lower = 0.0;
  double V_well = 0.0;
  double V_misspecified = 0.0;
  double V_corrected = 0.0;
  std::string note = "o(1/n) terms omitted";
};

BoundReport bound_report(const ModelDiagnostics& diag, int d, double n_u, double n_l, double rho);

std::string to_json(const DecompositionReport& r);
std::string to_json(const BoundReport& r);

}  // namespace wsmom

#endif  // WSMOM_ANALYSIS_HPP

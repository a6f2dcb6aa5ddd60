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

#include "wsmom/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "wsmom/errors.hpp"
#include "wsmom/estimators.hpp"
#include "wsmom/random.hpp"

namespace wsmom {
namespace {

double kl_bernoulli(double p, double q) {
  double out = 0.0;
  if (p > 0.0) out += p * std::log(p / q);
  if (p < 1.0) out += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
  return out;
}

double clamp_probability(double q, InferenceMode mode) {
  if (mode == InferenceMode::kNormalized) return std::clamp(q, kProbabilityClamp, 1.0 - kProbabilityClamp);
  return std::max(q, kProbabilityClamp);
}

}  // namespace

ExactEvaluator::ExactEvaluator(const IsingModel& truth)
    : truth_(&truth), diag_(wsmom::diagnostics(truth)), marginal_(truth.source_marginal()) {
  const int m = truth.m();
  const std::uint32_t ybit = std::uint32_t{1} << m;
  const auto joint = truth.joint();
  const double py[2] = {diag_.class_balance, 1.0 - diag_.class_balance};
  plus_.assign(static_cast<std::size_t>(m) * 2, 0.0);
  for (std::uint32_t s = 0; s < ybit; ++s) {
    for (int i = 0; i < m; ++i) {
      if (!((s >> i) & 1U)) continue;
      plus_[static_cast<std::size_t>(i) * 2 + 0] += joint[s | ybit];
      plus_[static_cast<std::size_t>(i) * 2 + 1] += joint[s];
    }
  }
  for (int i = 0; i < m; ++i)
    for (int y = 0; y < 2; ++y) plus_[static_cast<std::size_t>(i) * 2 + static_cast<std::size_t>(y)] /= py[y];
}

double ExactEvaluator::plus_given(int i, int y) const { return plus_[static_cast<std::size_t>(i) * 2 + static_cast<std::size_t>(y)]; }

DecompositionReport ExactEvaluator::decompose(const LabelModel& fitted) const {
  const int m = truth_->m();
  if (fitted.m() != m) throw ContractError("fitted model has a different source count");
  if (fitted.mode() != InferenceMode::kEmpiricalDenominator)
    throw ContractError("decomposition needs the empirical-denominator inference mode");
  const std::uint32_t ybit = std::uint32_t{1} << m;
  const auto joint = truth_->joint();
  const std::vector<double> lognum = fitted.log_numerator_table();

  DecompositionReport r;
  r.irreducible = diag_.H_cond;
  r.inference_bias = diag_.B_I;
  double loss = 0.0;
  double noise = 0.0;
  for (std::uint32_t s = 0; s < ybit; ++s) {
    const double fitted_pr = fitted.configs().probability(s);
    const double true_pr = marginal_[s];
    if (!(fitted_pr > 0.0)) {
      if (true_pr > 0.0) throw IdentityUndefinedError("fitted configuration distribution lacks full support");
      continue;
    }
    const double log_den = std::log(fitted_pr);
    if (true_pr > 0.0) noise += true_pr * std::log(true_pr / fitted_pr);
    loss -= joint[s | ybit] * (lognum[s | ybit] - log_den);
    loss -= joint[s] * (lognum[s] - log_den);
  }
  r.observable_noise = noise;
  r.independent_loss = loss;

  const double py[2] = {diag_.class_balance, 1.0 - diag_.class_balance};
  const int ys[2] = {1, -1};
  double param = 0.0;
  for (int i = 0; i < m; ++i)
    for (int y = 0; y < 2; ++y)
      param += py[y] * kl_bernoulli(plus_given(i, y), fitted.source_probability(i, 1, ys[y]));
  r.param_est_error = param;
  const double fp = fitted.class_balance();
  r.class_balance_term = kl_bernoulli(py[0], fp);
  r.total = r.irreducible - r.observable_noise + r.inference_bias + r.param_est_error + r.class_balance_term;
  r.residual = std::abs(r.total - r.independent_loss);
  return r;
}

double ExactEvaluator::expected_loss(const LabelModel& fitted) const {
  const int m = truth_->m();
  if (fitted.m() != m) throw ContractError("fitted model has a different source count");
  const std::uint32_t ybit = std::uint32_t{1} << m;
  const auto joint = truth_->joint();
  const std::vector<double> lognum = fitted.log_numerator_table();
  double loss = 0.0;
  if (fitted.mode() == InferenceMode::kEmpiricalDenominator) {
    for (std::uint32_t s = 0; s < ybit; ++s) {
      const double fitted_pr = fitted.configs().probability(s);
      if (!(fitted_pr > 0.0)) {
        if (marginal_[s] > 0.0) throw IdentityUndefinedError("fitted configuration distribution lacks full support");
        continue;
      }
      const double log_den = std::log(fitted_pr);
      for (std::uint32_t state : {s | ybit, s}) {
        const double lp = lognum[state] - log_den;
        // Clamping only matters below log(delta).
        loss -= joint[state] * (lp > std::log(kProbabilityClamp) ? lp : std::log(kProbabilityClamp));
      }
    }
  } else {
    for (std::uint32_t s = 0; s < ybit; ++s) {
      const double pos = 1.0 / (1.0 + std::exp(lognum[s] - lognum[s | ybit]));
      loss -= joint[s | ybit] * std::log(clamp_probability(pos, InferenceMode::kNormalized));
      loss -= joint[s] * std::log(clamp_probability(1.0 - pos, InferenceMode::kNormalized));
    }
  }
  return loss;
}

LabelModel ExactEvaluator::population_model(const ClassConditionalEstimate& params) const {
  return LabelModel(params, diag_.class_balance, ConfigDistribution::dense(truth_->m(), marginal_),
                    InferenceMode::kEmpiricalDenominator);
}

LabelModel ExactEvaluator::population_model(const AccuracyEstimate& accuracies) const {
  return LabelModel(accuracies, diag_.class_balance, ConfigDistribution::dense(truth_->m(), marginal_),
                    InferenceMode::kEmpiricalDenominator);
}

DecompositionReport decompose(const IsingModel& truth, const LabelModel& fitted) {
  return ExactEvaluator(truth).decompose(fitted);
}

GeneralizationError exact_generalization_error(const IsingModel& truth, const LabelModel& fitted) {
  const ExactEvaluator eval(truth);
  GeneralizationError out;
  out.loss = eval.expected_loss(fitted);
  out.excess = out.loss - eval.diagnostics().H_cond;
  return out;
}

BoundInputs bound_inputs(const ModelDiagnostics& diag, int d) {
  BoundInputs in;
  in.m = static_cast<int>(diag.a.size());
  in.d = d;
  in.eps_max = diag.eps_max;
  in.eps_min = diag.eps_min;
  in.a_min = diag.a_min;
  in.a_max = *std::max_element(diag.a.begin(), diag.a.end());
  in.b_min = diag.b_min;
  in.a_bar_max = diag.a_bar_max;
  in.B_I = diag.B_I;
  return in;
}

BoundInputs bound_inputs(const ModelDiagnostics& diag) { return bound_inputs(diag, static_cast<int>(diag.eps.size())); }

BoundConstants bound_constants(const BoundInputs& in) {
  if (in.a_bar_max >= 1.0) throw DegenerateConstantError("a_bar_max >= 1 makes the bound constants infinite");
  if (!(in.b_min > 0.0 && in.a_min > 0.0)) throw DegenerateConstantError("a_min and b_min must be positive");
  const double b2 = in.b_min * in.b_min;
  const double b4 = b2 * b2;
  const double a2 = in.a_min * in.a_min;
  const double g = 1.0 - in.a_bar_max * in.a_bar_max;
  const double tail = 1.0 / b4 + 2.0 / b2;
  BoundConstants c;
  c.c1 = 2.0 / (b2 * a2) * (1.0 + 1.0 / (g * b2 * a2));
  c.c2 = 1.0 / (g * b2 * a2) * std::sqrt(3.0 * (1.0 - b2) / b2 * tail);
  c.c3 = 3.0 * (1.0 - b2) / (g * g * b4 * a2) * tail;
  c.c4 = 3.0 * (1.0 - b2) / (8.0 * b2 * g) * tail;
  c.c_rho = 1.0 / (2.0 * (1.0 - in.a_max * in.a_max));
  return c;
}

double bound_labeled(const ModelDiagnostics& diag, double n_l) {
  if (!(n_l >= 1.0)) throw ContractError("n_L must be at least 1");
  return static_cast<double>(diag.a.size()) / (2.0 * n_l) + diag.B_I;
}

UnlabeledBound bound_unlabeled(const ModelDiagnostics& diag, double n_u, int d) {
  if (!(n_u >= 1.0)) throw ContractError("n_U must be at least 1");
  const BoundInputs in = bound_inputs(diag, d);
  UnlabeledBound out;
  out.constants = bound_constants(in);
  const auto& c = out.constants;
  const double m = in.m;
  out.B_est = in.eps_max * (c.c1 * d / m + c.c2 / std::sqrt(n_u) + c.c3 * d / (m * n_u));
  out.value = out.B_est + c.c4 * m / n_u + in.B_I;
  return out;
}

double bound_lower_unlabeled(const ModelDiagnostics& diag, int d) {
  const double m = static_cast<double>(diag.a.size());
  if (d < 0) throw ContractError("d must be >= 0");
  if (m < 3) throw ContractError("the lower bound needs m >= 3");
  const double b4 = std::pow(diag.b_min, 4);
  const double eps_min = d > 0 ? diag.eps_min : 0.0;
  const double first = ((m - 2.0 * d) * d * d * eps_min * eps_min * b4) /
                       (2.0 * (m - 1.0) * (m - 1.0) * (m - 2.0) * (m - 2.0));
  return first + diag.B_I;
}

bool median_conditions_hold(int m, int d) { return m > 5 && 4 * d < (m - 1) * (m - 2); }

MedianMseReport median_mse(const IsingModel& model, std::size_t n_u, int trials, std::uint64_t seed,
                           const ParallelMap& pool) {
  if (trials < 1) throw ContractError("median_mse needs at least one trial");
  const ModelDiagnostics diag = diagnostics(model);
  const int m = model.m();
  const JointSampler sampler(model);
  std::vector<std::vector<double>> sq(static_cast<std::size_t>(trials));
  pool.run(static_cast<std::size_t>(trials), [&](std::size_t t) {
    const SourceMatrix data = sampler.draw(n_u, derive_seed(seed, t, 0)).without_labels();
    const AccuracyEstimate est = estimate_triplet(data, Aggregation::kMedian, derive_seed(seed, t, 1));
    auto& row = sq[t];
    row.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      const double e = est.a_hat[static_cast<std::size_t>(i)] - diag.a[static_cast<std::size_t>(i)];
      row[static_cast<std::size_t>(i)] = e * e;
    }
  });
  MedianMseReport out;
  out.trials = trials;
  out.per_source_mse.assign(static_cast<std::size_t>(m), 0.0);
  for (const auto& row : sq)
    for (int i = 0; i < m; ++i) out.per_source_mse[static_cast<std::size_t>(i)] += row[static_cast<std::size_t>(i)];
  for (double& v : out.per_source_mse) v /= trials;
  out.rho = *std::max_element(out.per_source_mse.begin(), out.per_source_mse.end());
  const BoundInputs in = bound_inputs(diag);
  out.applicable = median_conditions_hold(m, in.d);
  out.c_rho = 1.0 / (2.0 * (1.0 - in.a_max * in.a_max));
  out.bound = out.c_rho * m * out.rho + diag.B_I;
  return out;
}

MedianMseReport median_mse_population(const IsingModel& model) {
  const ModelDiagnostics diag = diagnostics(model);
  const int m = model.m();
  const AccuracyEstimate est = estimate_triplet_from_moments(diag.M, Aggregation::kMedian, 0);
  MedianMseReport out;
  out.per_source_mse.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const double e = est.a_hat[static_cast<std::size_t>(i)] - diag.a[static_cast<std::size_t>(i)];
    out.per_source_mse[static_cast<std::size_t>(i)] = e * e;
  }
  out.rho = *std::max_element(out.per_source_mse.begin(), out.per_source_mse.end());
  const BoundInputs in = bound_inputs(diag);
  out.applicable = median_conditions_hold(m, in.d);
  out.c_rho = 1.0 / (2.0 * (1.0 - in.a_max * in.a_max));
  out.bound = out.c_rho * m * out.rho + diag.B_I;
  return out;
}

double approx_data_value_ratio(const BoundInputs& in, const BoundConstants& c, ValueSetting setting, double n_u,
                               double rho) {
  const double m = in.m;
  switch (setting) {
    case ValueSetting::kWellSpecified:
      return 2.0 * c.c4;
    case ValueSetting::kMisspecified:
      return 2.0 * in.eps_max * (c.c1 * in.d * n_u / m + c.c2 * std::sqrt(n_u) / m + c.c3 * in.d / (m * m)) +
             2.0 * c.c4;
    case ValueSetting::kCorrected:
      return 2.0 * n_u * c.c_rho * rho;
  }
  return 0.0;
}

BoundReport bound_report(const ModelDiagnostics& diag, int d, double n_u, double n_l, double rho) {
  BoundReport r;
  r.inputs = bound_inputs(diag, d);
  r.constants = bound_constants(r.inputs);
  r.n_u = n_u;
  r.n_l = n_l;
  r.rho = rho;
  r.R_L = bound_labeled(diag, n_l);
  const UnlabeledBound u = bound_unlabeled(diag, n_u, d);
  r.R_U = u.value;
  r.B_est = u.B_est;
  r.R_M = r.constants.c_rho * r.inputs.m * rho + diag.B_I;
  r.lower = bound_lower_unlabeled(diag, d);
  r.V_well = approx_data_value_ratio(r.inputs, r.constants, ValueSetting::kWellSpecified, n_u);
  r.V_misspecified = approx_data_value_ratio(r.inputs, r.constants, ValueSetting::kMisspecified, n_u);
  r.V_corrected = approx_data_value_ratio(r.inputs, r.constants, ValueSetting::kCorrected, n_u, rho);
  return r;
}

std::string to_json(const DecompositionReport& r) {
  nlohmann::json j{{"H_cond", r.irreducible},       {"observable_noise", r.observable_noise},
                   {"B_I", r.inference_bias},       {"param_est_error", r.param_est_error},
                   {"class_balance_term", r.class_balance_term}, {"total", r.total},
                   {"independent_loss", r.independent_loss},     {"residual", r.residual}};
  return j.dump(2);
}

std::string to_json(const BoundReport& r) {
  nlohmann::json j;
  j["inputs"] = {{"m", r.inputs.m},         {"d", r.inputs.d},         {"eps_max", r.inputs.eps_max},
                 {"eps_min", r.inputs.eps_min}, {"a_min", r.inputs.a_min}, {"a_max", r.inputs.a_max},
                 {"b_min", r.inputs.b_min}, {"a_bar_max", r.inputs.a_bar_max}, {"B_I", r.inputs.B_I},
                 {"n_U", r.n_u},            {"n_L", r.n_l},            {"rho", r.rho}};
  j["c1"] = r.constants.c1;
  j["c2"] = r.constants.c2;
  j["c3"] = r.constants.c3;
  j["c4"] = r.constants.c4;
  j["c_rho"] = r.constants.c_rho;
  j["B_est"] = r.B_est;
  j["R_L"] = r.R_L;
  j["R_U"] = r.R_U;
  j["R_M"] = r.R_M;
  j["lower"] = r.lower;
  j["V_well"] = r.V_well;
  j["V_misspecified"] = r.V_misspecified;
  j["V_corrected"] = r.V_corrected;
  j["note"] = r.note;
  return j.dump(2);
}

}  // namespace wsmom

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

#ifndef WSMOM_LABEL_MODEL_HPP
#define WSMOM_LABEL_MODEL_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "wsmom/estimators.hpp"
#include "wsmom/source_matrix.hpp"

namespace wsmom {

/// Distribution over source configurations: either fitted counts with
/// optional additive smoothing, or an explicit dense table.
class ConfigDistribution {
 public:
  /// kappa = 0 is the plain MLE; kappa > 0 adds kappa pseudo-counts to each
  /// of the 2^m configurations.
  static ConfigDistribution fit(const SourceMatrix& data, double kappa = 0.0);
  static ConfigDistribution fit(std::span<const std::uint32_t> configurations, int m, double kappa = 0.0);
  static ConfigDistribution dense(int m, std::vector<double> probabilities);

  int m() const { return m_; }
  double kappa() const { return kappa_; }
  std::size_t sample_size() const { return n_; }
  double probability(std::uint32_t config) const;
  /// True when every configuration has positive probability.
  bool full_support() const;

 private:
  int m_ = 0;
  double kappa_ = 0.0;
  std::size_t n_ = 0;
  std::unordered_map<std::uint32_t, std::uint64_t> counts_;
  std::vector<double> dense_;
};

enum class InferenceMode { kEmpiricalDenominator, kNormalized };

inline constexpr double kProbabilityClamp = 1e-12;
inline constexpr double kAccuracyClamp = 1e-6;

/// Conditionally independent label model:
/// P(Y = y | lambda) = prod_i P(lambda_i | Y = y) P(Y = y) / denominator,
/// where the denominator is the configuration distribution
/// (kEmpiricalDenominator) or the sum of both numerators (kNormalized).
class LabelModel {
 public:
  LabelModel(const ClassConditionalEstimate& params, double class_balance, ConfigDistribution configs,
             InferenceMode mode);
  LabelModel(const AccuracyEstimate& accuracies, double class_balance, ConfigDistribution configs,
             InferenceMode mode);

  int m() const { return m_; }
  double class_balance() const { return p_; }
  InferenceMode mode() const { return mode_; }
  const ConfigDistribution& configs() const { return configs_; }

  /// Clamped P(lambda_i = s | Y = y) used for inference.
  double source_probability(int i, int s, int y) const;

  /// log of prod_i P(lambda_i | Y = y) P(Y = y).
  double log_numerator(std::uint32_t config, int y) const;

  /// Log numerators for every joint state (bit m = Y), matching the state
  /// order of IsingModel::joint().
  std::vector<double> log_numerator_table() const;

  /// P(Y = y | lambda = config). Empirical-denominator mode may exceed 1 and
  /// throws UnseenConfigurationError when the configuration has zero mass.
  double posterior(std::uint32_t config, int y = 1) const;

 private:
  int m_;
  double p_;
  ConfigDistribution configs_;
  InferenceMode mode_;
  std::vector<double> log_prob_;  // [i][s index][y index], index 0 for +1
};

/// Mean cross-entropy over labelled rows with probabilities clamped before
/// the log (to [delta, 1 - delta] when normalized, to >= delta otherwise).
double cross_entropy(const LabelModel& model, const SourceMatrix& data);

struct F1Report {
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  bool undefined = false;  // no positive predictions and no positive labels
};

F1Report f1_score(const LabelModel& model, const SourceMatrix& data, double threshold = 0.5);

/// Soft labels 2 P(Y = 1 | lambda) - 1 per row.
std::vector<double> soft_labels(const LabelModel& model, const SourceMatrix& data);

/// CSV with columns row_id, p_y1, soft_label.
void write_soft_labels(std::ostream& out, const LabelModel& model, const SourceMatrix& data);

}  // namespace wsmom

#endif  // WSMOM_LABEL_MODEL_HPP

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

#include "wsmom/label_model.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "wsmom/errors.hpp"
#include "wsmom/ising.hpp"
#include "wsmom/kernels.hpp"

namespace wsmom {
namespace {

constexpr std::uint32_t kChunk = 4096;

inline int bit_spin(std::uint32_t config, int i) { return ((config >> i) & 1U) ? 1 : -1; }
inline std::size_t spin_index(int s) { return s > 0 ? 0 : 1; }

}  // namespace

ConfigDistribution ConfigDistribution::fit(const SourceMatrix& data, double kappa) {
  return fit(data.row_configurations(), data.m(), kappa);
}

ConfigDistribution ConfigDistribution::fit(std::span<const std::uint32_t> configurations, int m, double kappa) {
  if (configurations.empty()) throw ContractError("configuration distribution needs at least one row");
  if (!(kappa >= 0.0)) throw ContractError("smoothing must be >= 0");
  if (kappa > 0.0 && m > kMaxEnumeratedSources)
    throw CapacityError("full-support smoothing needs m <= " + std::to_string(kMaxEnumeratedSources));
  ConfigDistribution out;
  out.m_ = m;
  out.kappa_ = kappa;
  out.n_ = configurations.size();
  for (std::uint32_t c : configurations) ++out.counts_[c];
  return out;
}

ConfigDistribution ConfigDistribution::dense(int m, std::vector<double> probabilities) {
  if (m > kMaxEnumeratedSources) throw CapacityError("dense configuration table too large");
  if (probabilities.size() != (std::size_t{1} << m)) throw ContractError("dense table must have 2^m entries");
  ConfigDistribution out;
  out.m_ = m;
  out.dense_ = std::move(probabilities);
  return out;
}

double ConfigDistribution::probability(std::uint32_t config) const {
  if (!dense_.empty()) return dense_[config];
  const auto it = counts_.find(config);
  const double count = it == counts_.end() ? 0.0 : static_cast<double>(it->second);
  if (kappa_ == 0.0) return count / static_cast<double>(n_);
  return (count + kappa_) / (static_cast<double>(n_) + kappa_ * std::ldexp(1.0, m_));
}

bool ConfigDistribution::full_support() const {
  if (!dense_.empty()) return std::all_of(dense_.begin(), dense_.end(), [](double p) { return p > 0.0; });
  if (kappa_ > 0.0) return true;
  return m_ < 63 && counts_.size() == (std::size_t{1} << m_);
}

LabelModel::LabelModel(const ClassConditionalEstimate& params, double class_balance, ConfigDistribution configs,
                       InferenceMode mode)
    : m_(static_cast<int>(params.mu.size())), p_(class_balance), configs_(std::move(configs)), mode_(mode) {
  if (!(p_ > 0.0 && p_ < 1.0)) throw ContractError("class balance must lie in (0, 1)");
  if (configs_.m() != m_) throw ContractError("configuration distribution has a different source count");
  const double lo = kAccuracyClamp / 2.0;
  log_prob_.resize(static_cast<std::size_t>(m_) * 4);
  for (int i = 0; i < m_; ++i) {
    for (std::size_t yi = 0; yi < 2; ++yi) {
      const double plus = std::clamp(params.mu[static_cast<std::size_t>(i)][0][yi], lo, 1.0 - lo);
      log_prob_[static_cast<std::size_t>(i) * 4 + 0 * 2 + yi] = std::log(plus);
      log_prob_[static_cast<std::size_t>(i) * 4 + 1 * 2 + yi] = std::log1p(-plus);
    }
  }
}

LabelModel::LabelModel(const AccuracyEstimate& accuracies, double class_balance, ConfigDistribution configs,
                       InferenceMode mode)
    : LabelModel(
          [&] {
            std::vector<double> a(accuracies.a_hat);
            for (double& v : a) v = std::clamp(v, -1.0 + kAccuracyClamp, 1.0 - kAccuracyClamp);
            return class_conditional_from_accuracies(a, class_balance);
          }(),
          class_balance, std::move(configs), mode) {}

double LabelModel::source_probability(int i, int s, int y) const {
  return std::exp(log_prob_[static_cast<std::size_t>(i) * 4 + spin_index(s) * 2 + spin_index(y)]);
}

double LabelModel::log_numerator(std::uint32_t config, int y) const {
  double acc = std::log(y > 0 ? p_ : 1.0 - p_);
  const std::size_t yi = spin_index(y);
  for (int i = 0; i < m_; ++i) acc += log_prob_[static_cast<std::size_t>(i) * 4 + spin_index(bit_spin(config, i)) * 2 + yi];
  return acc;
}

std::vector<double> LabelModel::log_numerator_table() const {
  if (m_ > kMaxEnumeratedSources) throw CapacityError("numerator table too large");
  // f(s, y) over two spins expands as c0 + c1 s + c2 y + c3 s y.
  const std::uint32_t ybit = std::uint32_t{1} << m_;
  std::vector<kernels::SpinTerm> terms;
  const double lp = std::log(p_);
  const double ln = std::log(1.0 - p_);
  terms.push_back({0, 0.5 * (lp + ln)});
  terms.push_back({ybit, 0.5 * (lp - ln)});
  for (int i = 0; i < m_; ++i) {
    const double* f = &log_prob_[static_cast<std::size_t>(i) * 4];
    const double pp = f[0];  // s = +1, y = +1
    const double pn = f[1];  // s = +1, y = -1
    const double np = f[2];  // s = -1, y = +1
    const double nn = f[3];  // s = -1, y = -1
    const std::uint32_t sbit = std::uint32_t{1} << i;
    terms.push_back({0, 0.25 * (pp + pn + np + nn)});
    terms.push_back({sbit, 0.25 * (pp + pn - np - nn)});
    terms.push_back({ybit, 0.25 * (pp - pn + np - nn)});
    terms.push_back({sbit | ybit, 0.25 * (pp - pn - np + nn)});
  }
  std::vector<double> out(std::size_t{2} << m_);
  for (std::uint32_t first = 0; first < out.size(); first += kChunk) {
    const std::size_t len = std::min<std::size_t>(kChunk, out.size() - first);
    kernels::spin_sum(terms, first, std::span<double>(out.data() + first, len));
  }
  return out;
}

double LabelModel::posterior(std::uint32_t config, int y) const {
  const double own = log_numerator(config, y);
  if (mode_ == InferenceMode::kEmpiricalDenominator) {
    const double pr = configs_.probability(config);
    if (!(pr > 0.0)) throw UnseenConfigurationError("configuration has zero empirical probability");
    return std::exp(own - std::log(pr));
  }
  const double other = log_numerator(config, -y);
  return 1.0 / (1.0 + std::exp(other - own));
}

namespace {

double clamp_probability(double q, InferenceMode mode) {
  if (mode == InferenceMode::kNormalized) return std::clamp(q, kProbabilityClamp, 1.0 - kProbabilityClamp);
  return std::max(q, kProbabilityClamp);
}

}  // namespace

double cross_entropy(const LabelModel& model, const SourceMatrix& data) {
  if (!data.has_labels()) throw ContractError("cross-entropy needs labelled rows");
  if (data.m() != model.m()) throw ContractError("data and model have different source counts");
  const auto configs = data.row_configurations();
  double total = 0.0;
  for (std::size_t r = 0; r < configs.size(); ++r) {
    const int y = data.label(r);
    total -= std::log(clamp_probability(model.posterior(configs[r], y), model.mode()));
  }
  return total / static_cast<double>(configs.size());
}

F1Report f1_score(const LabelModel& model, const SourceMatrix& data, double threshold) {
  if (!data.has_labels()) throw ContractError("F1 needs labelled rows");
  const auto configs = data.row_configurations();
  double tp = 0.0;
  double fp = 0.0;
  double fn = 0.0;
  for (std::size_t r = 0; r < configs.size(); ++r) {
    const bool predicted = model.posterior(configs[r], 1) >= threshold;
    const bool actual = data.label(r) > 0;
    tp += predicted && actual;
    fp += predicted && !actual;
    fn += !predicted && actual;
  }
  F1Report out;
  if (tp + fp == 0.0 && tp + fn == 0.0) {
    out.undefined = true;
    return out;
  }
  out.precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
  out.recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
  out.f1 = tp > 0.0 ? 2.0 * tp / (2.0 * tp + fp + fn) : 0.0;
  return out;
}

std::vector<double> soft_labels(const LabelModel& model, const SourceMatrix& data) {
  const auto configs = data.row_configurations();
  std::vector<double> out(configs.size());
  for (std::size_t r = 0; r < configs.size(); ++r) out[r] = 2.0 * model.posterior(configs[r], 1) - 1.0;
  return out;
}

void write_soft_labels(std::ostream& out, const LabelModel& model, const SourceMatrix& data) {
  const auto configs = data.row_configurations();
  out << "row_id,p_y1,soft_label\n" << std::setprecision(17);
  for (std::size_t r = 0; r < configs.size(); ++r) {
    const double p = model.posterior(configs[r], 1);
    out << r << ',' << p << ',' << 2.0 * p - 1.0 << '\n';
  }
}

}  // namespace wsmom

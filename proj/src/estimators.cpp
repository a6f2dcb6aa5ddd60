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

#include "wsmom/estimators.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "wsmom/errors.hpp"
#include "wsmom/random.hpp"

namespace wsmom {
namespace {

double clip(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

bool is_known(std::span<const KnownEdge> known, int a, int b) {
  for (const auto& [x, y] : known)
    if ((x == a && y == b) || (x == b && y == a)) return true;
  return false;
}

double lower_median(std::vector<double> values) {
  const std::size_t mid = (values.size() - 1) / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  return values[mid];
}

// Reduces a nonempty list of per-triplet values according to the aggregation.
double aggregate(const std::vector<double>& values, Aggregation agg, Rng& rng) {
  switch (agg) {
    case Aggregation::kSingle:
      return values[uniform_index(rng, values.size())];
    case Aggregation::kMean:
      return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    case Aggregation::kMedian:
      return lower_median(values);
    case Aggregation::kNone:
      break;
  }
  throw ContractError("triplet estimation needs an aggregation");
}

void require_same_size(std::size_t a, std::size_t b) {
  if (a != b) throw ContractError("estimates have different source counts");
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::kLabeled:
      return "labeled";
    case Method::kTriplet:
      return "triplet";
    case Method::kCombined:
      return "combined";
  }
  return "unknown";
}

std::string to_string(Aggregation agg) {
  switch (agg) {
    case Aggregation::kNone:
      return "none";
    case Aggregation::kSingle:
      return "single";
    case Aggregation::kMean:
      return "mean";
    case Aggregation::kMedian:
      return "median";
  }
  return "unknown";
}

Aggregation parse_aggregation(const std::string& name) {
  if (name == "single") return Aggregation::kSingle;
  if (name == "mean") return Aggregation::kMean;
  if (name == "median") return Aggregation::kMedian;
  throw ContractError("unknown aggregation '" + name + "' (expected single, mean or median)");
}

AccuracyEstimate estimate_labeled(const SourceMatrix& data) {
  if (!data.has_labels()) throw ContractError("labelled estimation requires a label column");
  if (data.n() < 1) throw ContractError("labelled estimation requires at least one row");
  AccuracyEstimate out;
  out.a_hat = data.label_moments();
  out.method = Method::kLabeled;
  return out;
}

double triplet_raw(const Eigen::MatrixXd& moments, int i, int j, int k, double floor) {
  if (i == j || i == k || j == k) throw ContractError("triplet indices must be distinct");
  const double den = moments(j, k);
  if (std::abs(den) < floor) throw DegenerateTripletError("|M_jk| below the degeneracy floor");
  return clip(std::sqrt(std::abs(moments(i, j) * moments(i, k) / den)), 0.0, 1.0);
}

std::vector<double> triplet_values(const Eigen::MatrixXd& moments, int i) {
  const int m = static_cast<int>(moments.rows());
  std::vector<double> out;
  for (int j = 0; j < m; ++j)
    for (int k = j + 1; k < m; ++k)
      if (j != i && k != i) out.push_back(triplet_raw(moments, i, j, k));
  return out;
}

AccuracyEstimate estimate_triplet_from_moments(const Eigen::MatrixXd& moments, Aggregation agg,
                                               std::uint64_t seed, std::span<const KnownEdge> known_edges) {
  const int m = static_cast<int>(moments.rows());
  if (m < 3) throw ContractError("triplet estimation needs at least three sources");
  AccuracyEstimate out;
  out.method = Method::kTriplet;
  out.aggregation = agg;
  out.a_hat.resize(static_cast<std::size_t>(m));
  out.triplets_used.assign(static_cast<std::size_t>(m), 0);
  out.triplets_degenerate.assign(static_cast<std::size_t>(m), 0);
  out.triplets_excluded.assign(static_cast<std::size_t>(m), 0);
  std::vector<double> values;
  for (int i = 0; i < m; ++i) {
    const auto si = static_cast<std::size_t>(i);
    values.clear();
    for (int j = 0; j < m; ++j) {
      for (int k = j + 1; k < m; ++k) {
        if (j == i || k == i) continue;
        if (is_known(known_edges, i, j) || is_known(known_edges, i, k) || is_known(known_edges, j, k)) {
          ++out.triplets_excluded[si];
          continue;
        }
        if (std::abs(moments(j, k)) < kDegenerateFloor) {
          ++out.triplets_degenerate[si];
          continue;
        }
        values.push_back(triplet_raw(moments, i, j, k));
      }
    }
    if (values.empty())
      throw EstimationError("no usable triplet for source " + std::to_string(i));
    out.triplets_used[si] = static_cast<int>(values.size());
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    out.a_hat[si] = aggregate(values, agg, rng);
  }
  return out;
}

AccuracyEstimate estimate_triplet(const SourceMatrix& data, Aggregation agg, std::uint64_t seed,
                                  std::span<const KnownEdge> known_edges) {
  if (data.n() < 1) throw ContractError("triplet estimation requires at least one row");
  return estimate_triplet_from_moments(data.pairwise_moments(), agg, seed, known_edges);
}

AccuracyEstimate combine_linear(const AccuracyEstimate& a_u, const AccuracyEstimate& a_l, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ContractError("alpha must lie in [0, 1]");
  require_same_size(a_u.a_hat.size(), a_l.a_hat.size());
  AccuracyEstimate out;
  out.method = Method::kCombined;
  out.aggregation = a_u.aggregation;
  out.alpha = alpha;
  out.a_hat.resize(a_u.a_hat.size());
  for (std::size_t i = 0; i < out.a_hat.size(); ++i) {
    // Endpoints return the inputs bit for bit.
    const double v = alpha == 0.0   ? a_l.a_hat[i]
                     : alpha == 1.0 ? a_u.a_hat[i]
                                    : alpha * a_u.a_hat[i] + (1.0 - alpha) * a_l.a_hat[i];
    out.a_hat[i] = clip(v, -1.0, 1.0);
  }
  return out;
}

Eigen::MatrixXd labeled_estimate_covariance(const SourceMatrix& labeled) {
  if (!labeled.has_labels()) throw ContractError("covariance needs labelled rows");
  const int m = labeled.m();
  const std::size_t n = labeled.n();
  if (n < 2) throw NumericalError("covariance needs at least two labelled rows");
  Eigen::MatrixXd z(static_cast<Eigen::Index>(n), m);
  for (std::size_t r = 0; r < n; ++r) {
    const int y = labeled.label(r);
    for (int c = 0; c < m; ++c) z(static_cast<Eigen::Index>(r), c) = labeled.value(r, c) * y;
  }
  const Eigen::RowVectorXd mean = z.colwise().mean();
  z.rowwise() -= mean;
  Eigen::MatrixXd sigma = (z.transpose() * z) / static_cast<double>(n - 1) / static_cast<double>(n);
  const double ridge = 1e-8 * sigma.trace() / m;
  sigma.diagonal().array() += ridge;
  return sigma;
}

AccuracyEstimate combine_green_strawderman(const AccuracyEstimate& a_u, const AccuracyEstimate& a_l,
                                           const Eigen::MatrixXd& sigma, double r) {
  const std::size_t m = a_u.a_hat.size();
  require_same_size(m, a_l.a_hat.size());
  if (m < 3) throw ContractError("Green-Strawderman shrinkage needs m >= 3");
  if (!(r >= 0.0 && r <= 2.0 * (static_cast<double>(m) - 2.0)))
    throw ContractError("r must lie in [0, 2(m - 2)]");
  Eigen::VectorXd diff(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) diff(static_cast<Eigen::Index>(i)) = a_l.a_hat[i] - a_u.a_hat[i];
  double alpha = 1.0;
  if (diff.squaredNorm() > 0.0) {
    const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success || !(sigma.trace() > 0.0))
      throw NumericalError("labelled covariance is singular after regularization");
    const double norm = std::sqrt(diff.dot(llt.solve(diff)));
    if (!std::isfinite(norm)) throw NumericalError("non-finite Mahalanobis norm");
    alpha = norm > 0.0 ? std::min(r / norm, 1.0) : 1.0;
  }
  AccuracyEstimate out = combine_linear(a_u, a_l, alpha);
  out.r = r;
  return out;
}

AccuracyEstimate combine_green_strawderman(const AccuracyEstimate& a_u, const SourceMatrix& labeled,
                                           std::optional<double> r) {
  const AccuracyEstimate a_l = estimate_labeled(labeled);
  const double radius = r.value_or(static_cast<double>(labeled.m()) - 2.0);
  return combine_green_strawderman(a_u, a_l, labeled_estimate_covariance(labeled), radius);
}

ClassConditionalEstimate class_conditional_from(std::span<const double> pos, std::span<const double> neg,
                                                double class_balance) {
  require_same_size(pos.size(), neg.size());
  ClassConditionalEstimate out;
  out.class_balance = class_balance;
  out.mu.resize(pos.size());
  for (std::size_t i = 0; i < pos.size(); ++i) {
    const double u = clip(pos[i], 0.0, 1.0);
    const double v = clip(neg[i], 0.0, 1.0);
    out.mu[i] = {{{u, v}, {1.0 - u, 1.0 - v}}};
  }
  return out;
}

ClassConditionalEstimate class_conditional_from_accuracies(std::span<const double> a, double class_balance) {
  std::vector<double> pos(a.size());
  std::vector<double> neg(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    pos[i] = (1.0 + a[i]) / 2.0;
    neg[i] = (1.0 - a[i]) / 2.0;
  }
  return class_conditional_from(pos, neg, class_balance);
}

QuadraticMoments quadratic_moments(const SourceMatrix& data) {
  const int m = data.m();
  const double n = static_cast<double>(data.n());
  QuadraticMoments q;
  q.plus_rate.resize(static_cast<std::size_t>(m));
  q.both_plus = Eigen::MatrixXd::Zero(m, m);
  std::vector<double> ones(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    double count = 0.0;
    for (std::uint64_t w : data.column(i)) count += std::popcount(w);
    ones[static_cast<std::size_t>(i)] = count;
    q.plus_rate[static_cast<std::size_t>(i)] = count / n;
  }
  const Eigen::MatrixXd agree = data.pairwise_moments();
  for (int i = 0; i < m; ++i) {
    q.both_plus(i, i) = q.plus_rate[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < m; ++j) {
      // #(1,1) = (#agree + #1_i + #1_j - n) / 2
      const double agree_count = (agree(i, j) + 1.0) / 2.0 * n;
      const double both = (agree_count + ones[static_cast<std::size_t>(i)] + ones[static_cast<std::size_t>(j)] - n) / 2.0;
      q.both_plus(i, j) = q.both_plus(j, i) = both / n;
    }
  }
  return q;
}

// With X_s = Pr(l_s = 1 | Y = 1) - P(l_s = 1) and d = p / (1 - p), the
// conditional-independence model gives Cov(1{l_s}, 1{l_t}) = d X_s X_t. A
// triplet therefore yields d C_jk X_i^2 - C_ij C_ik = 0, and
// Pr(l_i = 1 | Y = -1) = P(l_i = 1) - d X_i.
std::optional<QuadraticRoot> solve_quadratic_triplet(const QuadraticMoments& q, double class_balance, int i,
                                                     int j, int k, bool* tie_break) {
  if (!(class_balance > 0.0 && class_balance < 1.0)) throw ContractError("class balance must lie in (0, 1)");
  if (i == j || i == k || j == k) throw ContractError("triplet indices must be distinct");
  const double d = class_balance / (1.0 - class_balance);
  const auto pi = q.plus_rate[static_cast<std::size_t>(i)];
  auto cov = [&](int s, int t) {
    return q.both_plus(s, t) - q.plus_rate[static_cast<std::size_t>(s)] * q.plus_rate[static_cast<std::size_t>(t)];
  };
  const double qa = d * cov(j, k);
  const double qc = -cov(i, j) * cov(i, k);
  if (std::abs(qa) < kDegenerateFloor * kDegenerateFloor) return std::nullopt;
  const double disc = -4.0 * qa * qc;
  if (disc < 0.0) return std::nullopt;
  const double x = std::sqrt(disc) / (2.0 * std::abs(qa));
  auto valid = [](QuadraticRoot r) { return r.pos >= 0.0 && r.pos <= 1.0 && r.neg >= 0.0 && r.neg <= 1.0; };
  const QuadraticRoot up{pi + x, pi - d * x};
  const QuadraticRoot down{pi - x, pi + d * x};
  const bool up_ok = valid(up);
  const bool down_ok = valid(down);
  if (tie_break) *tie_break = up_ok && down_ok && x > 0.0;
  // The larger root has Pr(l = 1 | Y = 1) >= Pr(l = 1 | Y = -1).
  if (up_ok) return up;
  if (down_ok) return down;
  return std::nullopt;
}

ClassConditionalEstimate estimate_quadratic_triplet_from_moments(const QuadraticMoments& q, double class_balance,
                                                                 Aggregation agg, std::uint64_t seed) {
  const int m = static_cast<int>(q.plus_rate.size());
  if (m < 3) throw ContractError("quadratic triplets need at least three sources");
  const double d = class_balance / (1.0 - class_balance);
  std::vector<double> pos(static_cast<std::size_t>(m));
  std::vector<double> neg(static_cast<std::size_t>(m));
  ClassConditionalEstimate out;
  out.triplets_used.assign(static_cast<std::size_t>(m), 0);
  out.triplets_skipped.assign(static_cast<std::size_t>(m), 0);
  out.tie_breaks.assign(static_cast<std::size_t>(m), 0);
  std::vector<double> shifts;
  for (int i = 0; i < m; ++i) {
    const auto si = static_cast<std::size_t>(i);
    shifts.clear();
    for (int j = 0; j < m; ++j) {
      for (int k = j + 1; k < m; ++k) {
        if (j == i || k == i) continue;
        bool tie = false;
        const auto root = solve_quadratic_triplet(q, class_balance, i, j, k, &tie);
        if (!root) {
          ++out.triplets_skipped[si];
          continue;
        }
        out.tie_breaks[si] += tie ? 1 : 0;
        shifts.push_back(root->pos - q.plus_rate[si]);
      }
    }
    if (shifts.empty()) throw EstimationError("no usable quadratic triplet for source " + std::to_string(i));
    out.triplets_used[si] = static_cast<int>(shifts.size());
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    const double x = aggregate(shifts, agg, rng);
    pos[si] = q.plus_rate[si] + x;
    neg[si] = q.plus_rate[si] - d * x;
  }
  ClassConditionalEstimate built = class_conditional_from(pos, neg, class_balance);
  built.aggregation = agg;
  built.triplets_used = std::move(out.triplets_used);
  built.triplets_skipped = std::move(out.triplets_skipped);
  built.tie_breaks = std::move(out.tie_breaks);
  return built;
}

ClassConditionalEstimate estimate_quadratic_triplet(const SourceMatrix& data, double class_balance,
                                                    Aggregation agg, std::uint64_t seed) {
  if (!(class_balance > 0.0 && class_balance < 1.0)) throw ContractError("class balance must lie in (0, 1)");
  if (data.n() < 1) throw ContractError("quadratic triplets require at least one row");
  return estimate_quadratic_triplet_from_moments(quadratic_moments(data), class_balance, agg, seed);
}

ClassConditionalEstimate estimate_class_conditional_labeled(const SourceMatrix& data, double class_balance) {
  if (!data.has_labels()) throw ContractError("labelled estimation requires a label column");
  const int m = data.m();
  std::vector<double> plus_pos(static_cast<std::size_t>(m), 0.0);
  std::vector<double> plus_neg(static_cast<std::size_t>(m), 0.0);
  double n_pos = 0.0;
  double n_neg = 0.0;
  const auto labels = data.label_column();
  for (std::uint64_t w : labels) n_pos += std::popcount(w);
  n_neg = static_cast<double>(data.n()) - n_pos;
  if (n_pos < 1.0 || n_neg < 1.0) throw EstimationError("labelled rows must contain both classes");
  for (int i = 0; i < m; ++i) {
    const auto col = data.column(i);
    double both = 0.0;
    double ones = 0.0;
    for (std::size_t w = 0; w < col.size(); ++w) {
      both += std::popcount(col[w] & labels[w]);
      ones += std::popcount(col[w]);
    }
    plus_pos[static_cast<std::size_t>(i)] = both / n_pos;
    plus_neg[static_cast<std::size_t>(i)] = (ones - both) / n_neg;
  }
  ClassConditionalEstimate out = class_conditional_from(plus_pos, plus_neg, class_balance);
  out.aggregation = Aggregation::kNone;
  return out;
}

ClassConditionalEstimate combine_class_conditional(const ClassConditionalEstimate& u,
                                                   const ClassConditionalEstimate& l, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ContractError("alpha must lie in [0, 1]");
  require_same_size(u.mu.size(), l.mu.size());
  std::vector<double> pos(u.mu.size());
  std::vector<double> neg(u.mu.size());
  for (std::size_t i = 0; i < u.mu.size(); ++i) {
    pos[i] = alpha * u.mu[i][0][0] + (1.0 - alpha) * l.mu[i][0][0];
    neg[i] = alpha * u.mu[i][0][1] + (1.0 - alpha) * l.mu[i][0][1];
  }
  ClassConditionalEstimate out = class_conditional_from(pos, neg, u.class_balance);
  out.aggregation = u.aggregation;
  return out;
}

double green_strawderman_alpha_class_conditional(const ClassConditionalEstimate& u, const SourceMatrix& labeled,
                                                 double r) {
  const ClassConditionalEstimate l = estimate_class_conditional_labeled(labeled, u.class_balance);
  const int m = labeled.m();
  require_same_size(u.mu.size(), static_cast<std::size_t>(m));
  // Parameters are (Pr(l_i = 1 | Y = 1))_i then (Pr(l_i = 1 | Y = -1))_i; the
  // two blocks come from disjoint rows and are independent.
  Eigen::VectorXd diff(2 * m);
  for (int i = 0; i < m; ++i) {
    diff(i) = l.mu[static_cast<std::size_t>(i)][0][0] - u.mu[static_cast<std::size_t>(i)][0][0];
    diff(m + i) = l.mu[static_cast<std::size_t>(i)][0][1] - u.mu[static_cast<std::size_t>(i)][0][1];
  }
  if (diff.squaredNorm() == 0.0) return 1.0;
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  for (int cls = 0; cls < 2; ++cls) {
    const int want = cls == 0 ? 1 : -1;
    std::vector<std::size_t> rows;
    for (std::size_t r_ = 0; r_ < labeled.n(); ++r_)
      if (labeled.label(r_) == want) rows.push_back(r_);
    const auto nc = static_cast<double>(rows.size());
    if (rows.size() < 2) throw NumericalError("each class needs at least two labelled rows");
    Eigen::MatrixXd z(static_cast<Eigen::Index>(rows.size()), m);
    for (std::size_t t = 0; t < rows.size(); ++t)
      for (int c = 0; c < m; ++c) z(static_cast<Eigen::Index>(t), c) = labeled.value(rows[t], c) > 0 ? 1.0 : 0.0;
    const Eigen::RowVectorXd mean = z.colwise().mean();
    z.rowwise() -= mean;
    sigma.block(cls * m, cls * m, m, m) = (z.transpose() * z) / (nc - 1.0) / nc;
  }
  sigma.diagonal().array() += 1e-8 * sigma.trace() / (2 * m);
  const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success || !(sigma.trace() > 0.0))
    throw NumericalError("labelled covariance is singular after regularization");
  const double norm = std::sqrt(diff.dot(llt.solve(diff)));
  return norm > 0.0 ? std::min(r / norm, 1.0) : 1.0;
}

}  // namespace wsmom

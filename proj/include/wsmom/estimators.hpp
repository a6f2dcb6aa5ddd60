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

#ifndef WSMOM_ESTIMATORS_HPP
#define WSMOM_ESTIMATORS_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wsmom/source_matrix.hpp"

namespace wsmom {

enum class Method { kLabeled, kTriplet, kCombined };
enum class Aggregation { kNone, kSingle, kMean, kMedian };

std::string to_string(Method method);
std::string to_string(Aggregation agg);
Aggregation parse_aggregation(const std::string& name);

struct AccuracyEstimate {
  std::vector<double> a_hat;
  Method method = Method::kLabeled;
  Aggregation aggregation = Aggregation::kNone;
  // Triplet bookkeeping, one entry per source.
  std::vector<int> triplets_used;
  std::vector<int> triplets_degenerate;
  std::vector<int> triplets_excluded;  // dropped because they contain a known edge
  // Weight on the unlabeled estimate for combined estimators.
  std::optional<double> alpha;
  std::optional<double> r;
};

inline constexpr double kDegenerateFloor = 1e-6;

/// a_hat_i = mean of lambda_i * y.
AccuracyEstimate estimate_labeled(const SourceMatrix& data);

/// sqrt|M_ij M_ik / M_jk| clipped to [0, 1]. Throws DegenerateTripletError
/// when |M_jk| is below the floor.
double triplet_raw(const Eigen::MatrixXd& moments, int i, int j, int k,
                   double floor = kDegenerateFloor);

using KnownEdge = std::pair<int, int>;

/// Triplet estimate from a moment matrix (empirical or population).
AccuracyEstimate estimate_triplet_from_moments(const Eigen::MatrixXd& moments, Aggregation agg,
                                               std::uint64_t seed,
                                               std::span<const KnownEdge> known_edges = {});

AccuracyEstimate estimate_triplet(const SourceMatrix& data, Aggregation agg, std::uint64_t seed,
                                  std::span<const KnownEdge> known_edges = {});

/// Every triplet value for source i, ordered by (j, k) with j < k.
std::vector<double> triplet_values(const Eigen::MatrixXd& moments, int i);

/// alpha * a_U + (1 - alpha) * a_L, clipped to [-1, 1].
AccuracyEstimate combine_linear(const AccuracyEstimate& a_u, const AccuracyEstimate& a_l, double alpha);

/// Positive-part shrinkage of the unlabeled estimate toward the labeled one.
/// r defaults to m - 2.
AccuracyEstimate combine_green_strawderman(const AccuracyEstimate& a_u, const SourceMatrix& labeled,
                                           std::optional<double> r = std::nullopt);

/// Same rule with an explicit covariance for the labeled estimate.
AccuracyEstimate combine_green_strawderman(const AccuracyEstimate& a_u, const AccuracyEstimate& a_l,
                                           const Eigen::MatrixXd& sigma, double r);

/// Covariance of rows lambda(x) * y divided by n_L, ridge-regularized.
Eigen::MatrixXd labeled_estimate_covariance(const SourceMatrix& labeled);

/// Class-conditional source model: mu[i][a][b] = Pr(lambda_i = s_a | Y = y_b)
/// with index 0 for +1 and 1 for -1.
struct ClassConditionalEstimate {
  using Table = std::array<std::array<double, 2>, 2>;
  std::vector<Table> mu;
  double class_balance = 0.5;
  Aggregation aggregation = Aggregation::kMedian;
  std::vector<int> triplets_used;
  std::vector<int> triplets_skipped;
  std::vector<int> tie_breaks;

  double pr_plus_given_pos(int i) const { return mu[static_cast<std::size_t>(i)][0][0]; }
  double pr_plus_given_neg(int i) const { return mu[static_cast<std::size_t>(i)][0][1]; }
};

ClassConditionalEstimate class_conditional_from(std::span<const double> pr_plus_given_pos,
                                                std::span<const double> pr_plus_given_neg,
                                                double class_balance);

/// Symmetric class-conditional model implied by accuracies.
ClassConditionalEstimate class_conditional_from_accuracies(std::span<const double> a,
                                                           double class_balance);

/// Observable statistics used by the quadratic triplet solver.
struct QuadraticMoments {
  std::vector<double> plus_rate;  // P(lambda_i = 1)
  Eigen::MatrixXd both_plus;      // P(lambda_i = 1, lambda_j = 1)
};

QuadraticMoments quadratic_moments(const SourceMatrix& data);

struct QuadraticRoot {
  double pos;  // Pr(lambda = 1 | Y = 1) for the target source
  double neg;  // Pr(lambda = 1 | Y = -1)
};

/// Solves one triplet (i, j, k) for source i. Returns nullopt when the
/// discriminant is negative or no root yields probabilities in [0, 1].
std::optional<QuadraticRoot> solve_quadratic_triplet(const QuadraticMoments& q, double class_balance,
                                                     int i, int j, int k, bool* tie_break = nullptr);

ClassConditionalEstimate estimate_quadratic_triplet_from_moments(const QuadraticMoments& q,
                                                                 double class_balance, Aggregation agg,
                                                                 std::uint64_t seed = 0);

ClassConditionalEstimate estimate_quadratic_triplet(const SourceMatrix& data, double class_balance,
                                                    Aggregation agg, std::uint64_t seed = 0);

/// Direct class-conditional frequencies from labelled rows.
ClassConditionalEstimate estimate_class_conditional_labeled(const SourceMatrix& data,
                                                            double class_balance);

/// Linear blend of two class-conditional estimates.
ClassConditionalEstimate combine_class_conditional(const ClassConditionalEstimate& u,
                                                   const ClassConditionalEstimate& l, double alpha);

/// Green-Strawderman weight for class-conditional parameters, with the
/// covariance of the labelled conditional frequencies.
double green_strawderman_alpha_class_conditional(const ClassConditionalEstimate& u,
                                                 const SourceMatrix& labeled, double r);

}  // namespace wsmom

#endif  // WSMOM_ESTIMATORS_HPP

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

#ifndef WSMOM_ISING_HPP
#define WSMOM_ISING_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wsmom/random.hpp"

namespace wsmom {

class SourceMatrix;

/// Largest source count whose joint table we are willing to enumerate.
inline constexpr int kMaxEnumeratedSources = 24;

struct Edge {
  int i = 0;
  int j = 0;
  double theta = 0.0;
};

/// Binary Ising model over (Y, lambda_1..lambda_m) with source-label
/// potentials and at most one source-source edge per source.
///
/// The joint table is indexed by state: bit k is source k (set = +1) and bit
/// m is Y. Construction enumerates the table eagerly; the object is immutable
/// afterwards.
class IsingModel {
 public:
  IsingModel(int m, double theta_y, std::vector<double> theta, std::vector<Edge> edges);

  int m() const { return m_; }
  double theta_y() const { return theta_y_; }
  const std::vector<double>& theta() const { return theta_; }
  const std::vector<Edge>& edges() const { return edges_; }

  std::span<const double> joint() const { return joint_; }
  std::size_t state_count() const { return joint_.size(); }
  double log_partition() const { return log_z_; }

  /// Pr(Y = 1).
  double class_balance() const;

  /// Exponent of the unnormalized density, evaluated term by term.
  double log_potential(std::uint32_t state) const;

  /// Pr(lambda = s) for every source configuration s in [0, 2^m).
  std::vector<double> source_marginal() const;

  /// Edge partner of source i, or -1.
  int partner(int i) const { return partner_[static_cast<std::size_t>(i)]; }

 private:
  int m_;
  double theta_y_;
  std::vector<double> theta_;
  std::vector<Edge> edges_;
  std::vector<int> partner_;
  std::vector<double> joint_;
  double log_z_ = 0.0;
};

struct EdgeEpsilon {
  int i = 0;
  int j = 0;
  double eps = 0.0;
};

/// Exact moments and information quantities of an IsingModel.
struct ModelDiagnostics {
  std::vector<double> a;  // E[lambda_i Y]
  Eigen::MatrixXd M;      // E[lambda_i lambda_j], unit diagonal
  double a_min = 0.0;
  double b_min = 0.0;
  double a_bar_max = 0.0;
  std::vector<EdgeEpsilon> eps;
  double eps_min = 0.0;
  double eps_max = 0.0;
  double class_balance = 0.5;
  double H_cond = 0.0;  // H(Y | lambda), nats
  double B_I = 0.0;     // total correlation of lambda given Y, nats
  // Largest |M_ij - a_i a_j| over pairs that share no edge.
  double max_nonedge_gap = 0.0;
};

ModelDiagnostics diagnostics(const IsingModel& model);

/// Sum over edges of I(lambda_i; lambda_j | Y) from pairwise marginals.
double edge_mutual_information(const IsingModel& model);

/// Pr(lambda_i = si | Y = y) for si, y in {-1, +1}.
double conditional_source_probability(const IsingModel& model, int i, int si, int y);

/// Per-edge misspecification E[l_i l_j] - a_i a_j from the edge potentials
/// alone, in closed form.
double epsilon_closed_form(double theta_i, double theta_j, double theta_ij);

/// Accuracies and pairwise moment of an isolated two-source component,
/// computed by summing its eight states.
struct PairMoments {
  double a_i;
  double a_j;
  double m_ij;
  double eps() const { return m_ij - a_i * a_j; }
};
PairMoments pair_moments(double theta_i, double theta_j, double theta_ij);

struct EdgeTarget {
  int i = 0;
  int j = 0;
  double eps = 0.0;
};

struct CalibrationOptions {
  double target_tolerance = 1e-6;
};

/// Finds potentials whose exact accuracies and per-edge epsilons match the
/// targets. Throws CalibrationError with the worst residual on failure.
IsingModel calibrate(std::span<const double> accuracies, std::span<const EdgeTarget> edges,
                     double class_balance = 0.5, const CalibrationOptions& options = {});

/// n i.i.d. rows with labels, by inverse CDF over the joint table.
SourceMatrix sample(const IsingModel& model, std::size_t n, std::uint64_t seed);

/// Cumulative joint table for repeated sampling.
class JointSampler {
 public:
  explicit JointSampler(const IsingModel& model);
  /// n rows seeded by `seed`; a smaller n yields a prefix of a larger draw.
  SourceMatrix draw(std::size_t n, std::uint64_t seed) const;
  std::uint32_t draw_state(Rng& rng) const;

 private:
  int m_;
  std::vector<double> cdf_;
};

std::string model_to_json(const IsingModel& model);
IsingModel model_from_json(const std::string& text);

/// Accuracy table and chained edges used by the synthetic experiments.
std::vector<double> synthetic_accuracies();
std::vector<EdgeTarget> synthetic_edges(int d, double eps = 0.1);

}  // namespace wsmom

#endif  // WSMOM_ISING_HPP

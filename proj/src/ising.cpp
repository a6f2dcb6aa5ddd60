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

#include "wsmom/ising.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "wsmom/errors.hpp"
#include "wsmom/kernels.hpp"
#include "wsmom/random.hpp"
#include "wsmom/source_matrix.hpp"

namespace wsmom {
namespace {

constexpr std::uint32_t kChunk = 4096;

inline int spin(std::uint32_t state, int bit) { return ((state >> bit) & 1U) ? 1 : -1; }

// In-place transform: afterwards v[S] = sum_x v_orig[x] * prod_{b in S} spin_b(x).
void spin_moments(std::vector<double>& v) {
  for (std::size_t half = 1; half < v.size(); half <<= 1) {
    for (std::size_t base = 0; base < v.size(); base += 2 * half) {
      for (std::size_t x = base; x < base + half; ++x) {
        const double lo = v[x];
        const double hi = v[x + half];
        v[x] = lo + hi;
        v[x + half] = hi - lo;
      }
    }
  }
}

double xlogy_ratio(double p, double q) { return p > 0.0 ? p * std::log(p / q) : 0.0; }

}  // namespace

IsingModel::IsingModel(int m, double theta_y, std::vector<double> theta, std::vector<Edge> edges)
    : m_(m), theta_y_(theta_y), theta_(std::move(theta)), edges_(std::move(edges)) {
  if (m < 1) throw ContractError("model needs at least one source");
  if (m > kMaxEnumeratedSources)
    throw CapacityError("m = " + std::to_string(m) + " exceeds the enumeration limit of " +
                        std::to_string(kMaxEnumeratedSources));
  if (static_cast<int>(theta_.size()) != m) throw ContractError("theta must have m entries");
  if (!std::isfinite(theta_y_)) throw ContractError("theta_Y must be finite");
  for (double t : theta_)
    if (!(t >= 0.0) || !std::isfinite(t)) throw ContractError("source potentials must be finite and >= 0");
  partner_.assign(static_cast<std::size_t>(m), -1);
  for (const Edge& e : edges_) {
    if (e.i < 0 || e.j < 0 || e.i >= m || e.j >= m || e.i == e.j)
      throw ContractError("edge endpoints must be distinct sources");
    if (!(e.theta >= 0.0) || !std::isfinite(e.theta))
      throw ContractError("edge potentials must be finite and >= 0");
    if (partner_[static_cast<std::size_t>(e.i)] != -1 || partner_[static_cast<std::size_t>(e.j)] != -1)
      throw ContractError("each source may belong to at most one edge");
    partner_[static_cast<std::size_t>(e.i)] = e.j;
    partner_[static_cast<std::size_t>(e.j)] = e.i;
  }

  const std::uint32_t ybit = std::uint32_t{1} << m;
  std::vector<kernels::SpinTerm> terms;
  terms.push_back({ybit, theta_y_});
  for (int i = 0; i < m; ++i) terms.push_back({(std::uint32_t{1} << i) | ybit, theta_[static_cast<std::size_t>(i)]});
  for (const Edge& e : edges_) terms.push_back({(std::uint32_t{1} << e.i) | (std::uint32_t{1} << e.j), e.theta});

  joint_.resize(std::size_t{1} << (m + 1));
  for (std::uint32_t first = 0; first < joint_.size(); first += kChunk) {
    const std::size_t len = std::min<std::size_t>(kChunk, joint_.size() - first);
    kernels::spin_sum(terms, first, std::span<double>(joint_.data() + first, len));
  }
  const double top = *std::max_element(joint_.begin(), joint_.end());
  double sum = 0.0;
  for (double& v : joint_) {
    v = std::exp(v - top);
    sum += v;
  }
  for (double& v : joint_) v /= sum;
  log_z_ = top + std::log(sum);
}

double IsingModel::class_balance() const {
  const std::size_t half = joint_.size() / 2;
  double p = 0.0;
  for (std::size_t s = half; s < joint_.size(); ++s) p += joint_[s];
  return p;
}

double IsingModel::log_potential(std::uint32_t state) const {
  const int y = spin(state, m_);
  double e = theta_y_ * y;
  for (int i = 0; i < m_; ++i) e += theta_[static_cast<std::size_t>(i)] * spin(state, i) * y;
  for (const Edge& edge : edges_) e += edge.theta * spin(state, edge.i) * spin(state, edge.j);
  return e;
}

std::vector<double> IsingModel::source_marginal() const {
  const std::size_t half = joint_.size() / 2;
  std::vector<double> out(half);
  for (std::size_t s = 0; s < half; ++s) out[s] = joint_[s] + joint_[s + half];
  return out;
}

double conditional_source_probability(const IsingModel& model, int i, int si, int y) {
  const auto joint = model.joint();
  const std::uint32_t ybit = std::uint32_t{1} << model.m();
  double num = 0.0;
  double den = 0.0;
  for (std::uint32_t s = 0; s < ybit; ++s) {
    const double p = joint[y > 0 ? (s | ybit) : s];
    den += p;
    if (spin(s, i) == si) num += p;
  }
  return num / den;
}

ModelDiagnostics diagnostics(const IsingModel& model) {
  const int m = model.m();
  const std::uint32_t ybit = std::uint32_t{1} << m;
  const auto joint = model.joint();
  ModelDiagnostics d;

  std::vector<double> mom(joint.begin(), joint.end());
  spin_moments(mom);
  d.a.resize(static_cast<std::size_t>(m));
  d.M = Eigen::MatrixXd::Identity(m, m);
  for (int i = 0; i < m; ++i) {
    d.a[static_cast<std::size_t>(i)] = mom[(std::uint32_t{1} << i) | ybit];
    for (int j = i + 1; j < m; ++j) d.M(i, j) = d.M(j, i) = mom[(std::uint32_t{1} << i) | (std::uint32_t{1} << j)];
  }
  d.class_balance = 0.5 * (1.0 + mom[ybit]);
  d.a_min = *std::min_element(d.a.begin(), d.a.end());

  d.b_min = 1.0;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) d.b_min = std::min(d.b_min, d.M(i, j));

  if (m >= 3) {
    d.a_bar_max = 0.0;
    for (int i = 0; i < m; ++i) {
      double sum = 0.0;
      int count = 0;
      for (int j = 0; j < m; ++j) {
        for (int k = j + 1; k < m; ++k) {
          if (j == i || k == i) continue;
          sum += std::sqrt(std::abs(d.M(i, j) * d.M(i, k) / d.M(j, k)));
          ++count;
        }
      }
      d.a_bar_max = std::max(d.a_bar_max, sum / count);
    }
  } else {
    d.a_bar_max = *std::max_element(d.a.begin(), d.a.end());
  }

  d.eps_min = std::numeric_limits<double>::infinity();
  d.eps_max = 0.0;
  for (const Edge& e : model.edges()) {
    const double eps = d.M(e.i, e.j) - d.a[static_cast<std::size_t>(e.i)] * d.a[static_cast<std::size_t>(e.j)];
    d.eps.push_back({e.i, e.j, eps});
    d.eps_min = std::min(d.eps_min, eps);
    d.eps_max = std::max(d.eps_max, eps);
  }
  if (d.eps.empty()) d.eps_min = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      if (model.partner(i) != j)
        d.max_nonedge_gap = std::max(
            d.max_nonedge_gap, std::abs(d.M(i, j) - d.a[static_cast<std::size_t>(i)] * d.a[static_cast<std::size_t>(j)]));

  // Per-class source marginals give both the product approximation and H(Y|lambda).
  const double py[2] = {1.0 - d.class_balance, d.class_balance};
  std::vector<double> plus(2 * static_cast<std::size_t>(m), 0.0);  // Pr(l_i = +1 | y)
  for (int yi = 0; yi < 2; ++yi) {
    const std::uint32_t off = yi ? ybit : 0;
    for (int i = 0; i < m; ++i) {
      double num = 0.0;
      for (std::uint32_t s = 0; s < ybit; ++s)
        if ((s >> i) & 1U) num += joint[s | off];
      plus[static_cast<std::size_t>(yi * m + i)] = num / py[yi];
    }
  }
  d.H_cond = 0.0;
  d.B_I = 0.0;
  for (std::uint32_t s = 0; s < ybit; ++s) {
    const double ps = joint[s] + joint[s | ybit];
    for (int yi = 0; yi < 2; ++yi) {
      const double p = joint[yi ? (s | ybit) : s];
      if (p <= 0.0) continue;
      d.H_cond -= p * std::log(p / ps);
      double log_product = 0.0;
      for (int i = 0; i < m; ++i) {
        const double q = plus[static_cast<std::size_t>(yi * m + i)];
        log_product += std::log(((s >> i) & 1U) ? q : 1.0 - q);
      }
      d.B_I += p * (std::log(p / py[yi]) - log_product);
    }
  }
  d.B_I = std::max(d.B_I, 0.0);
  return d;
}

double edge_mutual_information(const IsingModel& model) {
  const int m = model.m();
  const std::uint32_t ybit = std::uint32_t{1} << m;
  const auto joint = model.joint();
  double total = 0.0;
  for (const Edge& e : model.edges()) {
    // table[y][si][sj]
    double table[2][2][2] = {};
    for (std::uint32_t state = 0; state < joint.size(); ++state)
      table[(state & ybit) ? 1 : 0][(state >> e.i) & 1U][(state >> e.j) & 1U] += joint[state];
    for (auto& by_y : table) {
      const double py = by_y[0][0] + by_y[0][1] + by_y[1][0] + by_y[1][1];
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          const double pa = by_y[a][0] + by_y[a][1];
          const double pb = by_y[0][b] + by_y[1][b];
          total += xlogy_ratio(by_y[a][b], pa * pb / py);
        }
      }
    }
  }
  return total;
}

double epsilon_closed_form(double theta_i, double theta_j, double theta_ij) {
  double z = 0.0;
  double zp = 0.0;
  for (int si : {-1, 1}) {
    for (int sj : {-1, 1}) {
      z += std::exp(si * theta_i + sj * theta_j + si * sj * theta_ij);
      zp += std::exp(si * theta_i + sj * theta_j);
    }
  }
  const double sh = std::exp(theta_ij) - std::exp(-theta_ij);
  const double scale = 2.0 / (z * zp) * sh;
  const double delta_i = scale * (std::exp(2 * theta_j) - std::exp(-2 * theta_j));
  const double delta_j = scale * (std::exp(2 * theta_i) - std::exp(-2 * theta_i));
  const double delta_ij = scale * (std::exp(2 * theta_i) + std::exp(-2 * theta_i) +
                                   std::exp(2 * theta_j) + std::exp(-2 * theta_j));
  const double a_i0 = 2.0 / zp * std::exp(theta_i) * (std::exp(theta_j) + std::exp(-theta_j)) - 1.0;
  const double a_j0 = 2.0 / zp * std::exp(theta_j) * (std::exp(theta_i) + std::exp(-theta_i)) - 1.0;
  return delta_ij - delta_i * a_j0 - delta_j * a_i0 - delta_i * delta_j;
}

PairMoments pair_moments(double theta_i, double theta_j, double theta_ij) {
  double z = 0.0;
  double ai = 0.0;
  double aj = 0.0;
  double mij = 0.0;
  // With Y fixed to +1; the flipped half contributes identically.
  for (int si : {-1, 1}) {
    for (int sj : {-1, 1}) {
      const double w = std::exp(si * theta_i + sj * theta_j + si * sj * theta_ij);
      z += w;
      ai += w * si;
      aj += w * sj;
      mij += w * si * sj;
    }
  }
  return {ai / z, aj / z, mij / z};
}

IsingModel calibrate(std::span<const double> accuracies, std::span<const EdgeTarget> edges,
                     double class_balance, const CalibrationOptions& options) {
  const int m = static_cast<int>(accuracies.size());
  if (m < 1) throw ContractError("calibration needs at least one accuracy target");
  if (!(class_balance > 0.0 && class_balance < 1.0)) throw ContractError("class balance must lie in (0, 1)");
  for (double a : accuracies)
    if (!(a > 0.0 && a < 1.0)) throw ContractError("accuracy targets must lie in (0, 1)");
  std::vector<int> partner(static_cast<std::size_t>(m), -1);
  for (const EdgeTarget& e : edges) {
    if (e.i < 0 || e.j < 0 || e.i >= m || e.j >= m || e.i == e.j)
      throw ContractError("edge endpoints must be distinct sources");
    if (!(e.eps >= 0.0)) throw ContractError("epsilon targets must be >= 0");
    if (partner[static_cast<std::size_t>(e.i)] != -1 || partner[static_cast<std::size_t>(e.j)] != -1)
      throw ContractError("each source may belong to at most one edge");
    partner[static_cast<std::size_t>(e.i)] = e.j;
    partner[static_cast<std::size_t>(e.j)] = e.i;
  }

  // Within an edge component, (l_i Y, l_j Y) is a full two-spin exponential
  // family independent of Y, so its four cell probabilities follow directly
  // from (a_i, a_j, E[l_i l_j]) and the potentials are log-odds contrasts.
  std::vector<double> theta(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) theta[static_cast<std::size_t>(i)] = std::atanh(accuracies[static_cast<std::size_t>(i)]);
  std::vector<Edge> model_edges;
  for (const EdgeTarget& e : edges) {
    const double ai = accuracies[static_cast<std::size_t>(e.i)];
    const double aj = accuracies[static_cast<std::size_t>(e.j)];
    const double mij = e.eps + ai * aj;
    const double pp = (1 + ai + aj + mij) / 4;
    const double pm = (1 + ai - aj - mij) / 4;
    const double mp = (1 - ai + aj - mij) / 4;
    const double mm = (1 - ai - aj + mij) / 4;
    if (std::min({pp, pm, mp, mm}) <= 0.0)
      throw CalibrationError("epsilon target infeasible for the edge's accuracies", std::min({pp, pm, mp, mm}));
    const double ti = 0.25 * std::log(pp * pm / (mp * mm));
    const double tj = 0.25 * std::log(pp * mp / (pm * mm));
    const double tij = 0.25 * std::log(pp * mm / (pm * mp));
    if (ti < 0.0 || tj < 0.0)
      throw CalibrationError("targets require a negative source potential", -std::min(ti, tj));
    theta[static_cast<std::size_t>(e.i)] = ti;
    theta[static_cast<std::size_t>(e.j)] = tj;
    model_edges.push_back({e.i, e.j, std::max(tij, 0.0)});
  }

  IsingModel model(m, std::atanh(2.0 * class_balance - 1.0), std::move(theta), std::move(model_edges));
  const ModelDiagnostics d = diagnostics(model);
  double residual = std::abs(d.class_balance - class_balance);
  for (int i = 0; i < m; ++i)
    residual = std::max(residual, std::abs(d.a[static_cast<std::size_t>(i)] - accuracies[static_cast<std::size_t>(i)]));
  for (std::size_t k = 0; k < edges.size(); ++k) residual = std::max(residual, std::abs(d.eps[k].eps - edges[k].eps));
  if (residual > options.target_tolerance) throw CalibrationError("calibrated model misses its targets", residual);
  return model;
}

JointSampler::JointSampler(const IsingModel& model) : m_(model.m()), cdf_(model.state_count()) {
  const auto joint = model.joint();
  double acc = 0.0;
  for (std::size_t s = 0; s < cdf_.size(); ++s) cdf_[s] = (acc += joint[s]);
  cdf_.back() = 1.0;
}

SourceMatrix JointSampler::draw(std::size_t n, std::uint64_t seed) const {
  if (n < 1) throw ContractError("sample size must be at least 1");
  Rng rng(seed);
  std::vector<std::uint32_t> states(n);
  for (auto& s : states) s = draw_state(rng);
  return SourceMatrix::from_states(states, m_, true);
}

std::uint32_t JointSampler::draw_state(Rng& rng) const {
  const double u = uniform01(rng);
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return static_cast<std::uint32_t>(
      std::min<std::ptrdiff_t>(it - cdf_.begin(), static_cast<std::ptrdiff_t>(cdf_.size()) - 1));
}

SourceMatrix sample(const IsingModel& model, std::size_t n, std::uint64_t seed) {
  return JointSampler(model).draw(n, seed);
}

std::string model_to_json(const IsingModel& model) {
  nlohmann::json j;
  j["m"] = model.m();
  j["theta_Y"] = model.theta_y();
  j["theta"] = model.theta();
  j["edges"] = nlohmann::json::array();
  for (const Edge& e : model.edges()) j["edges"].push_back({{"i", e.i}, {"j", e.j}, {"theta_ij", e.theta}});
  j["class_balance"] = model.class_balance();
  return j.dump(2);
}

IsingModel model_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) edges.push_back({e.at("i").get<int>(), e.at("j").get<int>(), e.at("theta_ij").get<double>()});
    return IsingModel(j.at("m").get<int>(), j.at("theta_Y").get<double>(), j.at("theta").get<std::vector<double>>(),
                      std::move(edges));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model JSON: ") + e.what());
  }
}

std::vector<double> synthetic_accuracies() {
  return {.6893, .6072, .5954, .6603, .6939, .6346, .7462, .6870, .6462, .6284};
}

std::vector<EdgeTarget> synthetic_edges(int d, double eps) {
  if (d < 0 || d > 5) throw ContractError("synthetic models support 0 <= d <= 5");
  std::vector<EdgeTarget> out;
  for (int k = 0; k < d; ++k) out.push_back({2 * k, 2 * k + 1, eps});
  return out;
}

}  // namespace wsmom

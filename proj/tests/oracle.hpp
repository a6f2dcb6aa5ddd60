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

#ifndef WSMOM_TESTS_ORACLE_HPP
#define WSMOM_TESTS_ORACLE_HPP

// Reference computations written directly from the model definitions, with
// spins held as +-1 integers and no shared code with the library.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "wsmom/ising.hpp"

namespace wsmom::oracle {

struct Joint {
  int m = 0;
  std::vector<std::vector<int>> spins;  // spins[state] = (l_0..l_{m-1}, y)
  std::vector<double> prob;
};

inline Joint enumerate(int m, double theta_y, const std::vector<double>& theta, const std::vector<Edge>& edges) {
  Joint j;
  j.m = m;
  const std::size_t count = std::size_t{1} << (m + 1);
  double z = 0.0;
  for (std::size_t s = 0; s < count; ++s) {
    std::vector<int> v(static_cast<std::size_t>(m) + 1);
    for (int k = 0; k <= m; ++k) v[static_cast<std::size_t>(k)] = (s >> k) & 1U ? 1 : -1;
    const int y = v[static_cast<std::size_t>(m)];
    double e = theta_y * y;
    for (int k = 0; k < m; ++k) e += theta[static_cast<std::size_t>(k)] * v[static_cast<std::size_t>(k)] * y;
    for (const Edge& ed : edges) e += ed.theta * v[static_cast<std::size_t>(ed.i)] * v[static_cast<std::size_t>(ed.j)];
    j.spins.push_back(v);
    j.prob.push_back(std::exp(e));
    z += j.prob.back();
  }
  for (double& p : j.prob) p /= z;
  return j;
}

inline Joint enumerate(const IsingModel& model) {
  return enumerate(model.m(), model.theta_y(), model.theta(), model.edges());
}

// E[prod of the selected coordinates]; index m is Y.
inline double moment(const Joint& j, std::vector<int> idx) {
  double acc = 0.0;
  for (std::size_t s = 0; s < j.prob.size(); ++s) {
    int v = 1;
    for (int k : idx) v *= j.spins[s][static_cast<std::size_t>(k)];
    acc += j.prob[s] * v;
  }
  return acc;
}

inline double conditional_entropy(const Joint& j) {
  std::map<std::vector<int>, std::pair<double, double>> by_config;
  for (std::size_t s = 0; s < j.prob.size(); ++s) {
    std::vector<int> cfg(j.spins[s].begin(), j.spins[s].end() - 1);
    auto& [pos, neg] = by_config[cfg];
    (j.spins[s].back() == 1 ? pos : neg) += j.prob[s];
  }
  double h = 0.0;
  for (const auto& [cfg, pn] : by_config) {
    const double tot = pn.first + pn.second;
    for (double p : {pn.first, pn.second})
      if (p > 0) h -= p * std::log(p / tot);
  }
  return h;
}

// Sum over y of Pr(y) KL(Pr(lambda | y) || prod_i Pr(lambda_i | y)).
inline double total_correlation(const Joint& j) {
  const int m = j.m;
  double tc = 0.0;
  for (int y : {1, -1}) {
    double py = 0.0;
    std::vector<double> plus(static_cast<std::size_t>(m), 0.0);
    for (std::size_t s = 0; s < j.prob.size(); ++s) {
      if (j.spins[s].back() != y) continue;
      py += j.prob[s];
      for (int i = 0; i < m; ++i)
        if (j.spins[s][static_cast<std::size_t>(i)] == 1) plus[static_cast<std::size_t>(i)] += j.prob[s];
    }
    for (std::size_t s = 0; s < j.prob.size(); ++s) {
      if (j.spins[s].back() != y || j.prob[s] <= 0) continue;
      double prod = 1.0;
      for (int i = 0; i < m; ++i) {
        const double q = plus[static_cast<std::size_t>(i)] / py;
        prod *= j.spins[s][static_cast<std::size_t>(i)] == 1 ? q : 1.0 - q;
      }
      tc += j.prob[s] * std::log(j.prob[s] / py / prod);
    }
  }
  return tc;
}

// Random model with at most one edge per source and nonnegative potentials.
inline IsingModel random_model(std::mt19937_64& rng, int m, double theta_y = 0.0) {
  std::uniform_real_distribution<double> th(0.2, 1.2);
  std::uniform_real_distribution<double> ed(0.0, 0.8);
  std::vector<double> theta(static_cast<std::size_t>(m));
  for (double& t : theta) t = th(rng);
  std::vector<Edge> edges;
  for (int k = 0; k + 1 < m; k += 2)
    if (rng() % 2) edges.push_back({k, k + 1, ed(rng)});
  return IsingModel(m, theta_y, theta, edges);
}

}  // namespace wsmom::oracle

#endif  // WSMOM_TESTS_ORACLE_HPP

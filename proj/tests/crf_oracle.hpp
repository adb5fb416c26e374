// Copyright 2026 The claimx Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CLAIMX_TESTS_CRF_ORACLE_HPP_
#define CLAIMX_TESTS_CRF_ORACLE_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "claimx/crf.hpp"

namespace claimx::testing {

// Exhaustive enumeration over all K^T label sequences. Scores are summed term
// by term from the definition, independently of the library code.
struct CrfEnumeration {
  double log_z = 0.0;
  Eigen::MatrixXd marginals;
  std::vector<int> argmax;  // lexicographically smallest among maximizers
  double best = -std::numeric_limits<double>::infinity();
};

inline double direct_score(const Eigen::MatrixXd& e, const std::vector<int>& y,
                           const CrfParams<double>& p) {
  double s = p.start(y.front()) + p.end(y.back());
  for (std::size_t t = 0; t < y.size(); ++t) {
    s += e(static_cast<Eigen::Index>(t), y[t]);
    if (t > 0) s += p.transitions(y[t - 1], y[t]);
  }
  return s;
}

inline void for_each_sequence(int T, int K, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> y(static_cast<std::size_t>(T), 0);
  while (true) {
    f(y);
    int t = T - 1;
    while (t >= 0 && y[static_cast<std::size_t>(t)] == K - 1) y[static_cast<std::size_t>(t--)] = 0;
    if (t < 0) return;
    ++y[static_cast<std::size_t>(t)];
  }
}

inline CrfEnumeration enumerate_crf(const Eigen::MatrixXd& e, const CrfParams<double>& p) {
  const int T = static_cast<int>(e.rows()), K = static_cast<int>(e.cols());
  CrfEnumeration out;
  // Plain sum of exponentials: instances are small and scores bounded.
  double z = 0.0;
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(T, K);
  for_each_sequence(T, K, [&](const std::vector<int>& y) {
    const double s = direct_score(e, y, p);
    const double w = std::exp(s);
    z += w;
    for (int t = 0; t < T; ++t) mass(t, y[static_cast<std::size_t>(t)]) += w;
    if (s > out.best) {
      out.best = s;
      out.argmax = y;
    }
  });
  out.log_z = std::log(z);
  out.marginals = mass / z;
  return out;
}

}  // namespace claimx::testing

#endif  // CLAIMX_TESTS_CRF_ORACLE_HPP_

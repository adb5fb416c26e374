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

#ifndef CLAIMX_TESTS_TEST_UTIL_HPP_
#define CLAIMX_TESTS_TEST_UTIL_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>

#include "claimx/tensor.hpp"

namespace claimx::testing {

inline std::string fixture(const std::string& name) {
  return std::string(CLAIMX_FIXTURE_DIR) + "/" + name;
}

// |a - n| / max(|a| + |n|, floor): relative, with a floor so that entries that
// are zero on both sides do not divide by zero.
inline double rel_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max(std::abs(analytic) + std::abs(numeric), floor);
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

// Compares analytic parameter gradients of `loss_fn` against central
// differences with step h. At most `per_param` entries of each parameter are
// probed (evenly spaced) to bound the cost on large tensors.
inline GradCheck check_gradients(ParameterSet& params, const std::function<Var(Graph&)>& loss_fn,
                                 double h = 1e-5, Eigen::Index per_param = 1 << 30) {
  params.zero_grad();
  {
    Graph g;
    g.backward(loss_fn(g));
  }
  GradCheck out;
  auto eval = [&] {
    Graph g;
    return loss_fn(g).scalar();
  };
  for (auto& p : params) {
    if (!p->trainable) continue;
    const Eigen::Index n = p->value.size();
    const Eigen::Index stride = std::max<Eigen::Index>(1, n / std::min(n, per_param));
    for (Eigen::Index i = 0; i < n; i += stride) {
      double& x = p->value.data()[i];
      const double saved = x;
      x = saved + h;
      const double up = eval();
      x = saved - h;
      const double down = eval();
      x = saved;
      const double numeric = (up - down) / (2 * h);
      out.max_rel_error = std::max(out.max_rel_error, rel_error(p->grad.data()[i], numeric));
      ++out.checked;
    }
  }
  return out;
}

inline Tensor random_tensor(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng,
                            double scale = 1.0) {
  std::uniform_real_distribution<double> d(-scale, scale);
  Tensor t(r, c);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = d(rng);
  return t;
}

}  // namespace claimx::testing

#endif  // CLAIMX_TESTS_TEST_UTIL_HPP_

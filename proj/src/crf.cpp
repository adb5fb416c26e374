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

#include "claimx/crf.hpp"

#include <cmath>

namespace claimx {

CrfParams<double> crf_params_of(const CrfVars& vars) {
  CrfParams<double> p;
  p.transitions = vars.transitions.value();
  p.start = vars.start.value();
  p.end = vars.end.value();
  return p;
}

Var crf_nll(Var emissions, std::span<const int> gold, const CrfVars& params) {
  Graph& g = *emissions.graph();
  if (params.transitions.graph() != &g || params.start.graph() != &g ||
      params.end.graph() != &g) {
    throw ContractViolation("crf_nll: operands on different graphs");
  }
  const CrfParams<double> p = crf_params_of(params);
  const Tensor& e = emissions.value();
  const double gold_score = sequence_score(e, gold, p);
  const double log_z = log_partition(e, p);

  Tensor v(1, 1);
  v(0, 0) = log_z - gold_score;
  std::vector<int> labels(gold.begin(), gold.end());
  const int ie = emissions.id();
  const int ia = params.transitions.id();
  const int is = params.start.id();
  const int iend = params.end.id();
  return g.record(std::move(v), "crf_nll",
                  [labels = std::move(labels), ie, ia, is, iend](Graph& g, int self) {
                    const double up = g.grad(self)(0, 0);
                    const Tensor& e = g.value(ie);
                    CrfParams<double> p;
                    p.transitions = g.value(ia);
                    p.start = g.value(is);
                    p.end = g.value(iend);
                    const ForwardBackward<double> fb = forward_backward(e, p);
                    const Eigen::Index T = e.rows();
                    const Eigen::Index K = e.cols();
                    Eigen::MatrixXd marg = ((fb.alpha + fb.beta).array() - fb.log_z).exp().matrix();

                    Tensor de = marg;
                    for (Eigen::Index t = 0; t < T; ++t) de(t, labels[static_cast<std::size_t>(t)]) -= 1.0;

                    Tensor da = Tensor::Zero(K, K);
                    for (Eigen::Index t = 1; t < T; ++t) {
                      for (Eigen::Index i = 0; i < K; ++i) {
                        for (Eigen::Index j = 0; j < K; ++j) {
                          da(i, j) += std::exp(fb.alpha(t - 1, i) + p.transitions(i, j) + e(t, j) +
                                               fb.beta(t, j) - fb.log_z);
                        }
                      }
                      da(labels[static_cast<std::size_t>(t - 1)], labels[static_cast<std::size_t>(t)]) -= 1.0;
                    }

                    Tensor ds = marg.row(0).transpose();
                    ds(labels.front(), 0) -= 1.0;
                    Tensor dend = marg.row(T - 1).transpose();
                    dend(labels.back(), 0) -= 1.0;

                    g.accumulate(ie, de * up);
                    g.accumulate(ia, da * up);
                    g.accumulate(is, ds * up);
                    g.accumulate(iend, dend * up);
                  });
}

}  // namespace claimx

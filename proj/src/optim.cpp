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

#include "claimx/optim.hpp"

#include <algorithm>
#include <cmath>

namespace claimx {

void adam_step(ParameterSet& params, AdamState& state, double lr) {
  if (!(lr > 0.0)) throw ContractViolation("adam_step: learning rate must be positive");
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);
  for (auto& p : params) {
    if (p->grad.rows() != p->value.rows() || p->grad.cols() != p->value.cols()) {
      throw ContractViolation("adam_step: gradient shape mismatch for " + p->name);
    }
    if (!p->trainable) continue;
    auto [it, inserted] = state.moments.try_emplace(p->name);
    AdamState::Moments& mo = it->second;
    if (inserted) {
      mo.m = Tensor::Zero(p->value.rows(), p->value.cols());
      mo.v = Tensor::Zero(p->value.rows(), p->value.cols());
    } else if (mo.m.rows() != p->value.rows() || mo.m.cols() != p->value.cols()) {
      throw ContractViolation("adam_step: moment shape mismatch for " + p->name);
    }
    mo.m = state.beta1 * mo.m + (1.0 - state.beta1) * p->grad;
    mo.v = state.beta2 * mo.v + (1.0 - state.beta2) * p->grad.cwiseAbs2();
    p->value.array() -= lr * (mo.m.array() / bc1) /
                        ((mo.v.array() / bc2).sqrt() + state.epsilon);
  }
}

double clip_grad_norm(ParameterSet& params, double max_norm) {
  double sq = 0.0;
  for (const auto& p : params) {
    if (p->trainable) sq += p->grad.squaredNorm();
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (auto& p : params) {
      if (p->trainable) p->grad *= s;
    }
  }
  return norm;
}

bool PlateauScheduler::observe(double metric) {
  if (!std::isnan(metric) && metric < best_metric - tolerance) {
    best_metric = metric;
    epochs_since_best = 0;
    return false;
  }
  ++epochs_since_best;
  if (epochs_since_best > patience) {
    epochs_since_best = 0;
    const double next = std::max(current_lr * factor, min_lr);
    const bool reduced = next < current_lr;
    current_lr = std::min(current_lr, next);
    return reduced;
  }
  return false;
}

}  // namespace claimx

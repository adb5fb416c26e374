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

#ifndef CLAIMX_OPTIM_HPP_
#define CLAIMX_OPTIM_HPP_

#include <cstdint>
#include <limits>
#include <map>
#include <string>

#include "claimx/tensor.hpp"

namespace claimx {

struct AdamState {
  struct Moments {
    Tensor m;
    Tensor v;
  };
  std::map<std::string, Moments> moments;  // keyed by parameter name
  std::uint64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam update of every trainable parameter from its grad.
// Frozen parameters are left bit-identical. Increments state.t.
void adam_step(ParameterSet& params, AdamState& state, double lr);

// Rescales trainable gradients so their global L2 norm is at most max_norm.
// Returns the norm before clipping.
double clip_grad_norm(ParameterSet& params, double max_norm);

/// Reduce-on-plateau learning rate schedule over a lower-is-better metric.
struct PlateauScheduler {
  double current_lr = 1e-3;
  double factor = 0.5;
  int patience = 2;
  double tolerance = 1e-4;
  double min_lr = 1e-6;
  double best_metric = std::numeric_limits<double>::infinity();
  int epochs_since_best = 0;

  // Returns true when the learning rate was reduced.
  bool observe(double metric);
};

}  // namespace claimx

#endif  // CLAIMX_OPTIM_HPP_

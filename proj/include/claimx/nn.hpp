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

#ifndef CLAIMX_NN_HPP_
#define CLAIMX_NN_HPP_

#include <random>
#include <string>
#include <vector>

#include "claimx/tensor.hpp"

namespace claimx {

using Rng = std::mt19937_64;

// Xavier/Glorot uniform: U(-a, a), a = sqrt(6 / (fan_in + fan_out)).
Tensor xavier_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng);
Tensor uniform(Eigen::Index rows, Eigen::Index cols, double lo, double hi, Rng& rng);

/// Affine map y = W x + b over column vectors.
struct Linear {
  Parameter* weight = nullptr;  // out x in
  Parameter* bias = nullptr;    // out x 1

  static Linear create(ParameterSet& params, const std::string& prefix,
                       Eigen::Index in, Eigen::Index out, Rng& rng);
  Eigen::Index in_dim() const { return weight->value.cols(); }
  Eigen::Index out_dim() const { return weight->value.rows(); }
};

Var apply(Graph& g, const Linear& layer, Var x);

/// Gate blocks in W (4H x I), U (4H x H) and b (4H) are ordered
/// input, forget, cell, output.
struct LstmCellParams {
  Parameter* W = nullptr;
  Parameter* U = nullptr;
  Parameter* b = nullptr;

  inline static constexpr double kForgetBias = 1.0;

  static LstmCellParams create(ParameterSet& params, const std::string& prefix,
                               Eigen::Index input_dim, Eigen::Index hidden_dim,
                               Rng& rng);
  Eigen::Index input_dim() const { return W->value.cols(); }
  Eigen::Index hidden_dim() const { return U->value.cols(); }
};

// Cell weights bound to one graph, shared by every time step.
struct LstmCellVars {
  Var W;
  Var U;
  Var b;

  Eigen::Index input_dim() const { return W.cols(); }
  Eigen::Index hidden_dim() const { return U.cols(); }
};

LstmCellVars bind(Graph& g, const LstmCellParams& cell);

struct LstmState {
  Var h;
  Var c;
};

LstmState lstm_step(Graph& g, const LstmCellVars& cell, Var x, const LstmState& prev);
LstmState lstm_zero_state(Graph& g, const LstmCellVars& cell);

struct BiLstmOutput {
  std::vector<Var> outputs;  // concat(h_fwd[t], h_bwd[t]), 2H each
  Var final_fwd;             // h_fwd after the last input
  Var final_bwd;             // h_bwd after the first input
};

BiLstmOutput bilstm_encode(Graph& g, const std::vector<Var>& inputs,
                           const LstmCellVars& fwd, const LstmCellVars& bwd);
BiLstmOutput bilstm_encode(Graph& g, const std::vector<Var>& inputs,
                           const LstmCellParams& fwd, const LstmCellParams& bwd);

}  // namespace claimx

#endif  // CLAIMX_NN_HPP_

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

#include "claimx/nn.hpp"

#include <cmath>

namespace claimx {

Tensor uniform(Eigen::Index rows, Eigen::Index cols, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor t(rows, cols);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = dist(rng);
  return t;
}

Tensor xavier_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  return uniform(rows, cols, -a, a, rng);
}

Linear Linear::create(ParameterSet& params, const std::string& prefix, Eigen::Index in,
                      Eigen::Index out, Rng& rng) {
  Linear l;
  l.weight = &params.add(prefix + ".weight", xavier_uniform(out, in, rng));
  l.bias = &params.add(prefix + ".bias", Tensor::Zero(out, 1));
  return l;
}

Var apply(Graph& g, const Linear& layer, Var x) {
  return matmul(g.param(*layer.weight), x) + g.param(*layer.bias);
}

LstmCellParams LstmCellParams::create(ParameterSet& params, const std::string& prefix,
                                      Eigen::Index input_dim, Eigen::Index hidden_dim,
                                      Rng& rng) {
  if (input_dim <= 0 || hidden_dim <= 0) {
    throw ContractViolation("LSTM dimensions must be positive");
  }
  LstmCellParams cell;
  cell.W = &params.add(prefix + ".W", xavier_uniform(4 * hidden_dim, input_dim, rng));
  cell.U = &params.add(prefix + ".U", xavier_uniform(4 * hidden_dim, hidden_dim, rng));
  Tensor b = Tensor::Zero(4 * hidden_dim, 1);
  b.middleRows(hidden_dim, hidden_dim).setConstant(kForgetBias);
  cell.b = &params.add(prefix + ".b", std::move(b));
  return cell;
}

LstmCellVars bind(Graph& g, const LstmCellParams& cell) {
  return {g.param(*cell.W), g.param(*cell.U), g.param(*cell.b)};
}

LstmState lstm_zero_state(Graph& g, const LstmCellVars& cell) {
  const Eigen::Index h = cell.hidden_dim();
  return {g.constant(Tensor::Zero(h, 1)), g.constant(Tensor::Zero(h, 1))};
}

LstmState lstm_step(Graph& g, const LstmCellVars& cell, Var x, const LstmState& prev) {
  (void)g;
  if (x.rows() != cell.input_dim() || x.cols() != 1) {
    throw ContractViolation("lstm_step: input has " + std::to_string(x.rows()) +
                            " rows, cell expects " + std::to_string(cell.input_dim()));
  }
  const Eigen::Index h = cell.hidden_dim();
  Var z = matmul(cell.W, x) + matmul(cell.U, prev.h) + cell.b;
  Var in_gate = sigmoid(slice_rows(z, 0, h));
  Var forget_gate = sigmoid(slice_rows(z, h, h));
  Var candidate = tanh(slice_rows(z, 2 * h, h));
  Var out_gate = sigmoid(slice_rows(z, 3 * h, h));
  Var c = hadamard(forget_gate, prev.c) + hadamard(in_gate, candidate);
  Var hidden = hadamard(out_gate, tanh(c));
  return {hidden, c};
}

BiLstmOutput bilstm_encode(Graph& g, const std::vector<Var>& inputs,
                           const LstmCellParams& fwd, const LstmCellParams& bwd) {
  if (inputs.empty()) throw ContractViolation("bilstm_encode: empty sequence");
  return bilstm_encode(g, inputs, bind(g, fwd), bind(g, bwd));
}

BiLstmOutput bilstm_encode(Graph& g, const std::vector<Var>& inputs,
                           const LstmCellVars& fwd, const LstmCellVars& bwd) {
  if (inputs.empty()) throw ContractViolation("bilstm_encode: empty sequence");
  const std::size_t n = inputs.size();
  std::vector<Var> hf(n), hb(n);

  LstmState s = lstm_zero_state(g, fwd);
  for (std::size_t t = 0; t < n; ++t) {
    s = lstm_step(g, fwd, inputs[t], s);
    hf[t] = s.h;
  }
  LstmState r = lstm_zero_state(g, bwd);
  for (std::size_t t = n; t-- > 0;) {
    r = lstm_step(g, bwd, inputs[t], r);
    hb[t] = r.h;
  }

  BiLstmOutput out;
  out.outputs.reserve(n);
  for (std::size_t t = 0; t < n; ++t) out.outputs.push_back(concat({hf[t], hb[t]}));
  out.final_fwd = hf[n - 1];
  out.final_bwd = hb[0];
  return out;
}

}  // namespace claimx

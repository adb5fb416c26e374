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

#ifndef CLAIMX_CRF_HPP_
#define CLAIMX_CRF_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "claimx/tensor.hpp"

namespace claimx {

/// Linear-chain CRF scores: transitions(i, j) scores label i followed by j.
template <typename Scalar>
struct CrfParams {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix transitions;
  Vector start;
  Vector end;

  static CrfParams zeros(Eigen::Index num_labels) {
    return {Matrix::Zero(num_labels, num_labels), Vector::Zero(num_labels),
            Vector::Zero(num_labels)};
  }
  Eigen::Index num_labels() const { return start.size(); }
};

namespace crf_detail {

template <typename Derived, typename Scalar>
void check_shapes(const Eigen::MatrixBase<Derived>& emissions, const CrfParams<Scalar>& p) {
  const Eigen::Index k = p.num_labels();
  if (emissions.rows() < 1) throw ContractViolation("CRF: empty emission matrix");
  if (emissions.cols() != k || p.transitions.rows() != k || p.transitions.cols() != k ||
      p.end.size() != k) {
    throw ContractViolation("CRF: emission/parameter label counts disagree");
  }
}

template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::MatrixBase<Derived>& v) {
  using std::exp;
  using std::log;
  const auto m = v.maxCoeff();
  return m + log((v.array() - m).exp().sum());
}

}  // namespace crf_detail

/// start[y0] + sum_t e[t][y_t] + sum_t A[y_{t-1}][y_t] + end[y_{T-1}].
template <typename Derived, typename Scalar = typename Derived::Scalar>
Scalar sequence_score(const Eigen::MatrixBase<Derived>& emissions, std::span<const int> labels,
                      const CrfParams<Scalar>& p) {
  crf_detail::check_shapes(emissions, p);
  if (static_cast<Eigen::Index>(labels.size()) != emissions.rows()) {
    throw ContractViolation("CRF: label sequence length differs from emission rows");
  }
  const Eigen::Index k = p.num_labels();
  for (int y : labels) {
    if (y < 0 || y >= k) throw ContractViolation("CRF: label " + std::to_string(y) + " out of range");
  }
  Scalar s = p.start(labels[0]) + p.end(labels.back());
  for (std::size_t t = 0; t < labels.size(); ++t) {
    s += emissions(static_cast<Eigen::Index>(t), labels[t]);
    if (t > 0) s += p.transitions(labels[t - 1], labels[t]);
  }
  return s;
}

/// Log-space forward/backward tables. alpha(t, j) scores all prefixes ending
/// in j at t (start and emissions included); beta(t, i) scores all suffixes
/// after t given i at t (end included).
template <typename Scalar>
struct ForwardBackward {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> alpha;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> beta;
  Scalar log_z{};
};

template <typename Derived, typename Scalar = typename Derived::Scalar>
ForwardBackward<Scalar> forward_backward(const Eigen::MatrixBase<Derived>& emissions,
                                         const CrfParams<Scalar>& p) {
  crf_detail::check_shapes(emissions, p);
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index T = emissions.rows();
  const Eigen::Index K = p.num_labels();
  ForwardBackward<Scalar> fb;
  fb.alpha.resize(T, K);
  fb.beta.resize(T, K);

  fb.alpha.row(0) = (p.start + emissions.row(0).transpose()).transpose();
  for (Eigen::Index t = 1; t < T; ++t) {
    for (Eigen::Index j = 0; j < K; ++j) {
      Vector incoming = fb.alpha.row(t - 1).transpose() + p.transitions.col(j);
      fb.alpha(t, j) = emissions(t, j) + crf_detail::log_sum_exp(incoming);
    }
  }
  fb.beta.row(T - 1) = p.end.transpose();
  for (Eigen::Index t = T - 1; t-- > 0;) {
    Vector next = emissions.row(t + 1).transpose() + fb.beta.row(t + 1).transpose();
    for (Eigen::Index i = 0; i < K; ++i) {
      Vector outgoing = p.transitions.row(i).transpose() + next;
      fb.beta(t, i) = crf_detail::log_sum_exp(outgoing);
    }
  }
  Vector last = fb.alpha.row(T - 1).transpose() + p.end;
  fb.log_z = crf_detail::log_sum_exp(last);
  return fb;
}

/// log of the sum over all K^T label sequences of exp(sequence_score).
template <typename Derived, typename Scalar = typename Derived::Scalar>
Scalar log_partition(const Eigen::MatrixBase<Derived>& emissions, const CrfParams<Scalar>& p) {
  crf_detail::check_shapes(emissions, p);
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index K = p.num_labels();
  Vector alpha = p.start + emissions.row(0).transpose();
  for (Eigen::Index t = 1; t < emissions.rows(); ++t) {
    Vector next(K);
    for (Eigen::Index j = 0; j < K; ++j) {
      Vector incoming = alpha + p.transitions.col(j);
      next(j) = emissions(t, j) + crf_detail::log_sum_exp(incoming);
    }
    alpha = std::move(next);
  }
  Vector last = alpha + p.end;
  return crf_detail::log_sum_exp(last);
}

/// T x K matrix of P(y_t = k).
template <typename Derived, typename Scalar = typename Derived::Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> marginals(
    const Eigen::MatrixBase<Derived>& emissions, const CrfParams<Scalar>& p) {
  const ForwardBackward<Scalar> fb = forward_backward(emissions, p);
  return ((fb.alpha + fb.beta).array() - fb.log_z).exp().matrix();
}

template <typename Scalar>
struct ViterbiResult {
  std::vector<int> labels;
  Scalar score{};
};

/// Highest-scoring label sequence. Ties go to the lowest label id, both for
/// the final label and at every backpointer.
template <typename Derived, typename Scalar = typename Derived::Scalar>
ViterbiResult<Scalar> viterbi_decode(const Eigen::MatrixBase<Derived>& emissions,
                                     const CrfParams<Scalar>& p) {
  crf_detail::check_shapes(emissions, p);
  const Eigen::Index T = emissions.rows();
  const Eigen::Index K = p.num_labels();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> best = p.start + emissions.row(0).transpose();
  Eigen::MatrixXi back(T, K);
  for (Eigen::Index t = 1; t < T; ++t) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> next(K);
    for (Eigen::Index j = 0; j < K; ++j) {
      Eigen::Index arg = 0;
      Scalar top = best(0) + p.transitions(0, j);
      for (Eigen::Index i = 1; i < K; ++i) {
        const Scalar s = best(i) + p.transitions(i, j);
        if (s > top) {
          top = s;
          arg = i;
        }
      }
      next(j) = top + emissions(t, j);
      back(t, j) = static_cast<int>(arg);
    }
    best = std::move(next);
  }
  ViterbiResult<Scalar> out;
  Eigen::Index arg = 0;
  Scalar top = best(0) + p.end(0);
  for (Eigen::Index j = 1; j < K; ++j) {
    if (best(j) + p.end(j) > top) {
      top = best(j) + p.end(j);
      arg = j;
    }
  }
  out.score = top;
  out.labels.resize(static_cast<std::size_t>(T));
  out.labels[static_cast<std::size_t>(T - 1)] = static_cast<int>(arg);
  for (Eigen::Index t = T - 1; t > 0; --t) {
    arg = back(t, arg);
    out.labels[static_cast<std::size_t>(t - 1)] = static_cast<int>(arg);
  }
  return out;
}

/// CRF score tables as graph nodes.
struct CrfVars {
  Var transitions;  // K x K
  Var start;        // K x 1
  Var end;          // K x 1
};

/// Differentiable sequence NLL: log_partition - sequence_score(gold).
/// d/d emissions = marginals - onehot(gold); d/d transitions = expected
/// minus gold transition counts; start/end likewise at the boundaries.
Var crf_nll(Var emissions, std::span<const int> gold, const CrfVars& params);

// Snapshot of CRF node values as plain params.
CrfParams<double> crf_params_of(const CrfVars& vars);

}  // namespace claimx

#endif  // CLAIMX_CRF_HPP_

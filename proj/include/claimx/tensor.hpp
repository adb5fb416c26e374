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

#ifndef CLAIMX_TENSOR_HPP_
#define CLAIMX_TENSOR_HPP_

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace claimx {

// Dense row-major storage. Column vectors are n x 1.
using Tensor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Broken precondition: wrong shapes, out-of-range ids, non-scalar loss.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A NaN or Inf appeared while evaluating or differentiating an op.
class NumericError : public std::runtime_error {
 public:
  NumericError(std::string op, const std::string& what)
      : std::runtime_error(what), op_(std::move(op)) {}
  const std::string& op() const { return op_; }

 private:
  std::string op_;
};

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  bool trainable = true;
};

/// Ordered collection of uniquely named parameters. Addresses are stable for
/// the lifetime of the set, so graphs may hold references into it.
class ParameterSet {
 public:
  ParameterSet() = default;
  ParameterSet(const ParameterSet&) = delete;
  ParameterSet& operator=(const ParameterSet&) = delete;
  ParameterSet(ParameterSet&&) = default;
  ParameterSet& operator=(ParameterSet&&) = default;

  Parameter& add(std::string name, Tensor init, bool trainable = true);
  Parameter* find(std::string_view name);
  const Parameter* find(std::string_view name) const;
  Parameter& at(std::string_view name);
  const Parameter& at(std::string_view name) const;

  std::size_t size() const { return params_.size(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.cbegin(); }
  auto end() const { return params_.cend(); }

  void zero_grad();
  void set_trainable(bool trainable);
  // Sets trainable on every parameter whose name starts with `prefix`.
  void set_trainable(std::string_view prefix, bool trainable);

  // Order-sensitive FNV-1a over names and value bytes.
  std::uint64_t checksum() const;
  std::uint64_t checksum(std::string_view prefix) const;

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

class Graph;

/// Handle to a node in a Graph. Cheap to copy; valid while the graph lives.
class Var {
 public:
  Var() = default;
  Var(Graph* graph, int id) : graph_(graph), id_(id) {}

  const Tensor& value() const;
  const Tensor& grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const;

  Graph* graph() const { return graph_; }
  int id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }

 private:
  Graph* graph_ = nullptr;
  int id_ = -1;
};

/// Reverse-mode tape. Nodes are appended in evaluation order, so reverse
/// insertion order is a valid topological order for backpropagation.
class Graph {
 public:
  using Backward = std::function<void(Graph&, int self)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  // Binds `p` as a leaf. Repeated calls for the same parameter return the
  // same node.
  Var param(Parameter& p);

  // Appends a node. `op` names the node in numeric errors. Throws
  // NumericError if `value` is not finite.
  Var record(Tensor value, std::string_view op, Backward backward);

  const Tensor& value(int id) const { return nodes_[id].value; }
  const Tensor& grad(int id) const;
  // Adds `g` into the gradient of node `id`.
  void accumulate(int id, const Tensor& g);
  template <typename Derived>
  void accumulate(int id, const Eigen::MatrixBase<Derived>& g) {
    accumulate(id, Tensor(g));
  }

  // Mutable gradient of node `id`, zero-initialized on first access. Lets
  // sparse ops (row lookups, slices) update a block in place.
  Tensor& grad_buffer(int id);

  // Fills gradients of every node reachable from `loss` and accumulates them
  // into trainable parameters.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::string_view op;
    Backward backward;
    Parameter* param = nullptr;
  };
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, int> bound_;
};

void backpropagate(Var loss);

// Primitives. Operands must live on the same graph.
Var matmul(Var a, Var b);
Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var hadamard(Var a, Var b);
Var scale(Var a, double s);
Var tanh(Var a);
Var sigmoid(Var a);
// Stacks column vectors (or matrices with equal cols) vertically.
Var concat(const std::vector<Var>& parts);
Var slice_rows(Var a, Eigen::Index start, Eigen::Index count);
// Row `index` of `table` as a column vector.
Var embedding_lookup(Var table, Eigen::Index index);
// Builds a T x K matrix whose row t is the transpose of column vector t.
Var stack_rows(const std::vector<Var>& columns);
Var sum(Var a);
Var mean(const std::vector<Var>& parts);
Var softmax(Var logits);
Var log_softmax(Var logits);
// Row-wise log-softmax over a T x K matrix.
Var log_softmax_rows(Var logits);
// Softmax cross-entropy of a column of logits against class `gold`.
Var cross_entropy(Var logits, int gold);
// Sum over rows t of the softmax cross-entropy of row t against gold[t].
Var cross_entropy_rows(Var logits, const std::vector<int>& gold);

}  // namespace claimx

#endif  // CLAIMX_TENSOR_HPP_

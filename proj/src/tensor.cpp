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

#include "claimx/tensor.hpp"

#include <cmath>
#include <sstream>

#include "claimx/hash.hpp"

namespace claimx {

// ---------------------------------------------------------------------------
// ParameterSet

Parameter& ParameterSet::add(std::string name, Tensor init, bool trainable) {
  if (find(name) != nullptr) {
    throw ContractViolation("duplicate parameter name: " + name);
  }
  auto p = std::make_unique<Parameter>();
  p->name = std::move(name);
  p->grad = Tensor::Zero(init.rows(), init.cols());
  p->value = std::move(init);
  p->trainable = trainable;
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter* ParameterSet::find(std::string_view name) {
  for (auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

const Parameter* ParameterSet::find(std::string_view name) const {
  for (const auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

Parameter& ParameterSet::at(std::string_view name) {
  Parameter* p = find(name);
  if (p == nullptr) {
    throw ContractViolation("no parameter named " + std::string(name));
  }
  return *p;
}

const Parameter& ParameterSet::at(std::string_view name) const {
  const Parameter* p = find(name);
  if (p == nullptr) {
    throw ContractViolation("no parameter named " + std::string(name));
  }
  return *p;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p->grad.setZero();
}

void ParameterSet::set_trainable(bool trainable) {
  for (auto& p : params_) p->trainable = trainable;
}

void ParameterSet::set_trainable(std::string_view prefix, bool trainable) {
  for (auto& p : params_) {
    if (std::string_view(p->name).starts_with(prefix)) p->trainable = trainable;
  }
}

std::uint64_t ParameterSet::checksum() const { return checksum(""); }

std::uint64_t ParameterSet::checksum(std::string_view prefix) const {
  Fnv1a h;
  for (const auto& p : params_) {
    if (!std::string_view(p->name).starts_with(prefix)) continue;
    h.update(p->name);
    h.update(p->value.data(), sizeof(double) * p->value.size());
  }
  return h.digest();
}

// ---------------------------------------------------------------------------
// Graph

const Tensor& Var::value() const { return graph_->value(id_); }
const Tensor& Var::grad() const { return graph_->grad(id_); }

double Var::scalar() const {
  const Tensor& v = value();
  if (v.rows() != 1 || v.cols() != 1) {
    throw ContractViolation("scalar() on a non-scalar node");
  }
  return v(0, 0);
}

Var Graph::constant(Tensor value) { return record(std::move(value), "constant", nullptr); }

Var Graph::param(Parameter& p) {
  if (auto it = bound_.find(&p); it != bound_.end()) return Var(this, it->second);
  Var v = record(p.value, "param", nullptr);
  nodes_[v.id()].param = &p;
  bound_.emplace(&p, v.id());
  return v;
}

Var Graph::record(Tensor value, std::string_view op, Backward backward) {
  if (!value.allFinite()) {
    throw NumericError(std::string(op),
                       "non-finite value produced by " + std::string(op));
  }
  nodes_.push_back(Node{std::move(value), Tensor(), op, std::move(backward), nullptr});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

const Tensor& Graph::grad(int id) const {
  auto& node = const_cast<Node&>(nodes_[id]);
  if (node.grad.size() == 0) {
    node.grad = Tensor::Zero(node.value.rows(), node.value.cols());
  }
  return node.grad;
}

Tensor& Graph::grad_buffer(int id) {
  Node& node = nodes_[id];
  if (node.grad.size() == 0) {
    node.grad = Tensor::Zero(node.value.rows(), node.value.cols());
  }
  return node.grad;
}

void Graph::accumulate(int id, const Tensor& g) {
  Node& node = nodes_[id];
  if (g.rows() != node.value.rows() || g.cols() != node.value.cols()) {
    std::ostringstream msg;
    msg << "gradient shape " << g.rows() << "x" << g.cols() << " does not match "
        << node.op << " value " << node.value.rows() << "x" << node.value.cols();
    throw ContractViolation(msg.str());
  }
  if (node.grad.size() == 0) {
    node.grad = g;
  } else {
    node.grad += g;
  }
}

void Graph::backward(Var loss) {
  if (loss.graph() != this) throw ContractViolation("loss belongs to another graph");
  const Tensor& lv = value(loss.id());
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ContractViolation("backpropagate requires a scalar loss");
  }
  for (auto& n : nodes_) n.grad.resize(0, 0);
  nodes_[loss.id()].grad = Tensor::Ones(1, 1);
  for (int id = loss.id(); id >= 0; --id) {
    Node& node = nodes_[id];
    if (node.grad.size() == 0) continue;
    if (!node.grad.allFinite()) {
      throw NumericError(std::string(node.op),
                         "non-finite gradient at " + std::string(node.op));
    }
    if (node.backward) node.backward(*this, id);
    if (node.param != nullptr && node.param->trainable) {
      node.param->grad += node.grad;
    }
  }
}

void backpropagate(Var loss) {
  if (!loss.valid()) throw ContractViolation("backpropagate on an empty Var");
  loss.graph()->backward(loss);
}

// ---------------------------------------------------------------------------
// Primitives

namespace {

Graph& same_graph(Var a, Var b) {
  if (a.graph() == nullptr || a.graph() != b.graph()) {
    throw ContractViolation("operands live on different graphs");
  }
  return *a.graph();
}

void require_same_shape(Var a, Var b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream msg;
    msg << op << ": shape mismatch " << a.rows() << "x" << a.cols() << " vs "
        << b.rows() << "x" << b.cols();
    throw ContractViolation(msg.str());
  }
}

void require_column(Var a, const char* op) {
  if (a.cols() != 1) {
    throw ContractViolation(std::string(op) + ": expected a column vector");
  }
}

double log_sum_exp(const Tensor& z) {
  const double m = z.maxCoeff();
  return m + std::log((z.array() - m).exp().sum());
}

}  // namespace

Var matmul(Var a, Var b) {
  Graph& g = same_graph(a, b);
  if (a.cols() != b.rows()) {
    std::ostringstream msg;
    msg << "matmul: inner dimensions differ (" << a.rows() << "x" << a.cols()
        << " * " << b.rows() << "x" << b.cols() << ")";
    throw ContractViolation(msg.str());
  }
  const int ia = a.id(), ib = b.id();
  return g.record(a.value() * b.value(), "matmul", [ia, ib](Graph& g, int self) {
    const Tensor& up = g.grad(self);
    g.accumulate(ia, up * g.value(ib).transpose());
    g.accumulate(ib, g.value(ia).transpose() * up);
  });
}

Var operator+(Var a, Var b) {
  Graph& g = same_graph(a, b);
  require_same_shape(a, b, "add");
  const int ia = a.id(), ib = b.id();
  return g.record(a.value() + b.value(), "add", [ia, ib](Graph& g, int self) {
    const Tensor& up = g.grad(self);
    g.accumulate(ia, up);
    g.accumulate(ib, up);
  });
}

Var operator-(Var a, Var b) {
  Graph& g = same_graph(a, b);
  require_same_shape(a, b, "sub");
  const int ia = a.id(), ib = b.id();
  return g.record(a.value() - b.value(), "sub", [ia, ib](Graph& g, int self) {
    const Tensor& up = g.grad(self);
    g.accumulate(ia, up);
    g.accumulate(ib, -up);
  });
}

Var hadamard(Var a, Var b) {
  Graph& g = same_graph(a, b);
  require_same_shape(a, b, "hadamard");
  const int ia = a.id(), ib = b.id();
  Tensor v = a.value().cwiseProduct(b.value());
  return g.record(std::move(v), "hadamard", [ia, ib](Graph& g, int self) {
    const Tensor& up = g.grad(self);
    g.accumulate(ia, up.cwiseProduct(g.value(ib)));
    g.accumulate(ib, up.cwiseProduct(g.value(ia)));
  });
}

Var scale(Var a, double s) {
  Graph& g = *a.graph();
  const int ia = a.id();
  return g.record(a.value() * s, "scale", [ia, s](Graph& g, int self) {
    g.accumulate(ia, g.grad(self) * s);
  });
}

Var tanh(Var a) {
  Graph& g = *a.graph();
  const int ia = a.id();
  Tensor v = a.value().array().tanh().matrix();
  return g.record(std::move(v), "tanh", [ia](Graph& g, int self) {
    const Tensor& y = g.value(self);
    g.accumulate(ia, g.grad(self).cwiseProduct((1.0 - y.array().square()).matrix()));
  });
}

Var sigmoid(Var a) {
  Graph& g = *a.graph();
  const int ia = a.id();
  Tensor v = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  return g.record(std::move(v), "sigmoid", [ia](Graph& g, int self) {
    const Tensor& y = g.value(self);
    g.accumulate(ia,
                 g.grad(self).cwiseProduct((y.array() * (1.0 - y.array())).matrix()));
  });
}

Var concat(const std::vector<Var>& parts) {
  if (parts.empty()) throw ContractViolation("concat of zero parts");
  Graph& g = *parts.front().graph();
  const Eigen::Index cols = parts.front().cols();
  Eigen::Index rows = 0;
  for (const Var& p : parts) {
    if (p.graph() != &g) throw ContractViolation("concat: operands on different graphs");
    if (p.cols() != cols) throw ContractViolation("concat: column counts differ");
    rows += p.rows();
  }
  Tensor v(rows, cols);
  std::vector<int> ids;
  std::vector<Eigen::Index> offsets;
  Eigen::Index off = 0;
  for (const Var& p : parts) {
    v.middleRows(off, p.rows()) = p.value();
    ids.push_back(p.id());
    offsets.push_back(off);
    off += p.rows();
  }
  return g.record(std::move(v), "concat",
                  [ids = std::move(ids), offsets = std::move(offsets)](Graph& g, int self) {
                    const Tensor& up = g.grad(self);
                    for (std::size_t i = 0; i < ids.size(); ++i) {
                      g.accumulate(ids[i], up.middleRows(offsets[i], g.value(ids[i]).rows()));
                    }
                  });
}

Var slice_rows(Var a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count <= 0 || start + count > a.rows()) {
    throw ContractViolation("slice_rows: range out of bounds");
  }
  Graph& g = *a.graph();
  const int ia = a.id();
  Tensor v = a.value().middleRows(start, count);
  return g.record(std::move(v), "slice_rows", [ia, start, count](Graph& g, int self) {
    const Tensor up = g.grad(self);
    g.grad_buffer(ia).middleRows(start, count) += up;
  });
}

Var embedding_lookup(Var table, Eigen::Index index) {
  if (index < 0 || index >= table.rows()) {
    throw ContractViolation("embedding_lookup: id " + std::to_string(index) +
                            " outside table of " + std::to_string(table.rows()) +
                            " rows");
  }
  Graph& g = *table.graph();
  const int it = table.id();
  Tensor v = table.value().row(index).transpose();
  return g.record(std::move(v), "embedding_lookup", [it, index](Graph& g, int self) {
    const Tensor up = g.grad(self);
    g.grad_buffer(it).row(index) += up.transpose();
  });
}

Var stack_rows(const std::vector<Var>& columns) {
  if (columns.empty()) throw ContractViolation("stack_rows of zero vectors");
  Graph& g = *columns.front().graph();
  const Eigen::Index k = columns.front().rows();
  Tensor v(static_cast<Eigen::Index>(columns.size()), k);
  std::vector<int> ids;
  for (std::size_t t = 0; t < columns.size(); ++t) {
    const Var& c = columns[t];
    if (c.graph() != &g) throw ContractViolation("stack_rows: operands on different graphs");
    require_column(c, "stack_rows");
    if (c.rows() != k) throw ContractViolation("stack_rows: vector lengths differ");
    v.row(static_cast<Eigen::Index>(t)) = c.value().transpose();
    ids.push_back(c.id());
  }
  return g.record(std::move(v), "stack_rows", [ids = std::move(ids)](Graph& g, int self) {
    const Tensor& up = g.grad(self);
    for (std::size_t t = 0; t < ids.size(); ++t) {
      g.accumulate(ids[t], Tensor(up.row(static_cast<Eigen::Index>(t)).transpose()));
    }
  });
}

Var sum(Var a) {
  Graph& g = *a.graph();
  const int ia = a.id();
  Tensor v(1, 1);
  v(0, 0) = a.value().sum();
  return g.record(std::move(v), "sum", [ia](Graph& g, int self) {
    const Tensor& x = g.value(ia);
    g.accumulate(ia, Tensor::Constant(x.rows(), x.cols(), g.grad(self)(0, 0)));
  });
}

Var mean(const std::vector<Var>& parts) {
  if (parts.empty()) throw ContractViolation("mean of zero parts");
  Var acc = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) acc = acc + parts[i];
  return scale(acc, 1.0 / static_cast<double>(parts.size()));
}

Var softmax(Var logits) {
  require_column(logits, "softmax");
  Graph& g = *logits.graph();
  const int iz = logits.id();
  const Tensor& z = logits.value();
  Tensor s = (z.array() - log_sum_exp(z)).exp().matrix();
  return g.record(std::move(s), "softmax", [iz](Graph& g, int self) {
    const Tensor& s = g.value(self);
    const Tensor& up = g.grad(self);
    const double dot = up.cwiseProduct(s).sum();
    g.accumulate(iz, s.cwiseProduct((up.array() - dot).matrix()));
  });
}

Var log_softmax(Var logits) {
  require_column(logits, "log_softmax");
  Graph& g = *logits.graph();
  const int iz = logits.id();
  const Tensor& z = logits.value();
  Tensor l = (z.array() - log_sum_exp(z)).matrix();
  return g.record(std::move(l), "log_softmax", [iz](Graph& g, int self) {
    const Tensor& l = g.value(self);
    const Tensor& up = g.grad(self);
    Tensor sm = l.array().exp().matrix();
    g.accumulate(iz, up - sm * up.sum());
  });
}

Var log_softmax_rows(Var logits) {
  Graph& g = *logits.graph();
  const int iz = logits.id();
  const Tensor& z = logits.value();
  Tensor l(z.rows(), z.cols());
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    Tensor row = z.row(r);
    l.row(r) = (row.array() - log_sum_exp(row)).matrix();
  }
  return g.record(std::move(l), "log_softmax_rows", [iz](Graph& g, int self) {
    const Tensor& l = g.value(self);
    const Tensor& up = g.grad(self);
    Tensor sm = l.array().exp().matrix();
    Tensor dz = up;
    for (Eigen::Index r = 0; r < l.rows(); ++r) {
      dz.row(r) -= sm.row(r) * up.row(r).sum();
    }
    g.accumulate(iz, dz);
  });
}

Var cross_entropy(Var logits, int gold) {
  require_column(logits, "cross_entropy");
  if (gold < 0 || gold >= logits.rows()) {
    throw ContractViolation("cross_entropy: gold class " + std::to_string(gold) +
                            " out of range");
  }
  Graph& g = *logits.graph();
  const int iz = logits.id();
  const Tensor& z = logits.value();
  Tensor v(1, 1);
  v(0, 0) = log_sum_exp(z) - z(gold, 0);
  return g.record(std::move(v), "cross_entropy", [iz, gold](Graph& g, int self) {
    const Tensor& z = g.value(iz);
    Tensor p = (z.array() - log_sum_exp(z)).exp().matrix();
    p(gold, 0) -= 1.0;
    g.accumulate(iz, p * g.grad(self)(0, 0));
  });
}

Var cross_entropy_rows(Var logits, const std::vector<int>& gold) {
  const Tensor& z = logits.value();
  if (static_cast<Eigen::Index>(gold.size()) != z.rows()) {
    throw ContractViolation("cross_entropy_rows: " + std::to_string(gold.size()) +
                            " labels for " + std::to_string(z.rows()) + " rows");
  }
  for (int y : gold) {
    if (y < 0 || y >= z.cols()) {
      throw ContractViolation("cross_entropy_rows: gold class " + std::to_string(y) +
                              " out of range");
    }
  }
  Graph& g = *logits.graph();
  const int iz = logits.id();
  Tensor v = Tensor::Zero(1, 1);
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    Tensor row = z.row(r);
    v(0, 0) += log_sum_exp(row) - z(r, gold[static_cast<std::size_t>(r)]);
  }
  return g.record(std::move(v), "cross_entropy_rows", [iz, gold](Graph& g, int self) {
    const Tensor& z = g.value(iz);
    const double up = g.grad(self)(0, 0);
    Tensor dz(z.rows(), z.cols());
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
      Tensor row = z.row(r);
      dz.row(r) = (row.array() - log_sum_exp(row)).exp().matrix();
      dz(r, gold[static_cast<std::size_t>(r)]) -= 1.0;
    }
    g.accumulate(iz, dz * up);
  });
}

}  // namespace claimx

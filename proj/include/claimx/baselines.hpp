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

#ifndef CLAIMX_BASELINES_HPP_
#define CLAIMX_BASELINES_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "claimx/corpus.hpp"
#include "claimx/tensor.hpp"
#include "claimx/text.hpp"

namespace claimx {

class TaggerModel;

// ---------------------------------------------------------------------------
// Rule-based extraction

/// One slot of a lexical pattern.
struct PatternElement {
  enum class Kind { kAlternatives, kWildcard, kGap };
  Kind kind = Kind::kAlternatives;
  std::vector<std::string> alternatives;  // lowercase tokens, for kAlternatives
};

struct Rule {
  std::string source;  // the rule line as written
  std::vector<PatternElement> elements;
};

/// Keyword phrases and token-class patterns, matched against a tokenized
/// sentence.
///
/// File format, one rule per line (`#` starts a comment):
///   class: NAME = tok|tok|...      defines a token class usable as @NAME
///   keyword: <phrase>              contiguous token sequence
///   pattern: <slots>               slots are literals, a|b alternatives,
///                                  @NAME classes, `*` (any one token) and
///                                  `...` (a gap of 0 to 4 tokens)
class RuleSet {
 public:
  static constexpr int kMaxGap = 4;

  static RuleSet parse(std::string_view text);
  static RuleSet load(const std::string& path);
  // The shipped rule file under the data directory.
  static RuleSet default_rules();
  static std::string default_rules_path();

  const std::vector<Rule>& keywords() const { return keywords_; }
  const std::vector<Rule>& patterns() const { return patterns_; }
  std::size_t size() const { return keywords_.size() + patterns_.size(); }

  // First rule matching `tokens`, or nullptr.
  const Rule* first_match(const std::vector<std::string>& tokens) const;

 private:
  std::vector<Rule> keywords_;
  std::vector<Rule> patterns_;
};

bool rule_based_extract(const std::vector<std::string>& tokens, const RuleSet& rules);
std::vector<bool> rule_based_extract(const Abstract& abstract, const RuleSet& rules);

// ---------------------------------------------------------------------------
// Positional baseline

// Marks exactly the final sentence.
std::vector<bool> last_sentence_baseline(const Abstract& abstract);

// ---------------------------------------------------------------------------
// SIF sentence embeddings

struct SifConfig {
  double a = 1e-3;
};

/// Unigram frequencies p(w) = count(w) / total.
class WordFrequencies {
 public:
  WordFrequencies() = default;
  WordFrequencies(std::unordered_map<std::string, std::int64_t> counts);
  static WordFrequencies from_vocabulary(const Vocabulary& vocab);
  // `token count` lines.
  static WordFrequencies load(const std::string& path);

  // 0 for unseen tokens.
  double probability(std::string_view token) const;
  std::int64_t total() const { return total_; }

 private:
  std::unordered_map<std::string, std::int64_t> counts_;
  std::int64_t total_ = 0;
};

inline double sif_weight(double p, double a) { return a / (a + p); }

struct SifEmbedding {
  Eigen::VectorXd vector;
  bool empty_input = false;  // no tokens; vector is all zero
};

// (1/|s|) sum_w a/(a + p(w)) emb(w). Out-of-vocabulary words use the UNK row.
SifEmbedding sif_embed(const std::vector<std::string>& tokens, const WordFrequencies& freq,
                       const Vocabulary& vocab, const Eigen::MatrixXd& table,
                       const SifConfig& cfg = {});

/// Top right-singular direction u of a set of row vectors and the projection
/// that removes it.
template <typename Scalar>
struct PrincipalComponent {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Vector u;
  int iterations = 0;

  // v - u (u^T v)
  Vector remove(const Vector& v) const { return v - u * u.dot(v); }
  // Applies remove() to every row.
  Matrix remove_rows(const Matrix& m) const { return m - (m * u) * u.transpose(); }
};

/// Power iteration on the (uncentered) Gram matrix X^T X until successive
/// iterates differ by less than `tolerance`. The sign is fixed so the
/// largest-magnitude component of u is positive.
template <typename Derived, typename Scalar = typename Derived::Scalar>
PrincipalComponent<Scalar> remove_first_pc(const Eigen::MatrixBase<Derived>& rows,
                                           Scalar tolerance = Scalar(1e-9),
                                           int max_iterations = 100000) {
  using Vector = typename PrincipalComponent<Scalar>::Vector;
  using Matrix = typename PrincipalComponent<Scalar>::Matrix;
  if (rows.rows() < 2) throw ContractViolation("remove_first_pc: need at least two vectors");
  if (rows.cols() < 1) throw ContractViolation("remove_first_pc: zero-dimensional vectors");
  if (!rows.allFinite()) throw ContractViolation("remove_first_pc: non-finite input");
  Eigen::Index start_row = 0;
  const Scalar top = rows.rowwise().norm().maxCoeff(&start_row);
  if (top == Scalar(0)) throw ContractViolation("remove_first_pc: all vectors are zero");

  const Matrix gram = rows.transpose() * rows;
  Vector v = rows.row(start_row).transpose() / top;
  PrincipalComponent<Scalar> pc;
  for (int it = 1; it <= max_iterations; ++it) {
    Vector next = gram * v;
    const Scalar n = next.norm();
    if (n == Scalar(0)) break;
    next /= n;
    const Scalar delta = (next - v).norm();
    v = std::move(next);
    pc.iterations = it;
    if (delta < tolerance) break;
  }
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v(arg) < Scalar(0)) v = -v;
  pc.u = v;
  return pc;
}

// ---------------------------------------------------------------------------
// Regularized logistic regression

struct LogRegConfig {
  double lambda = 1e-3;
  int epochs = 500;
  double lr = 0.01;
};

struct LogRegModel {
  Eigen::VectorXd w;
  double b = 0.0;
  double lambda = 0.0;
};

struct LogRegObjective {
  double loss = 0.0;
  Eigen::VectorXd grad_w;
  double grad_b = 0.0;
};

// Mean log-loss + (lambda/2)||w||^2 and its gradient; the bias is not
// regularized. `features` is N x D.
LogRegObjective logreg_objective(const LogRegModel& model, const Eigen::MatrixXd& features,
                                 const std::vector<bool>& labels);

// Full-batch gradient descent from zero weights. When `loss_history` is set it
// receives the objective before each step.
LogRegModel train_logreg(const Eigen::MatrixXd& features, const std::vector<bool>& labels,
                         const LogRegConfig& cfg = {},
                         std::vector<double>* loss_history = nullptr);

double predict_logreg(const LogRegModel& model, const Eigen::VectorXd& x);

// ---------------------------------------------------------------------------
// Discourse features

/// Per-sentence discourse label distributions (T x K, rows sum to 1).
class DiscourseScorer {
 public:
  virtual ~DiscourseScorer() = default;
  virtual int num_labels() const = 0;
  virtual Eigen::MatrixXd distributions(const Abstract& abstract) const = 0;
};

class TaggerDiscourseScorer : public DiscourseScorer {
 public:
  explicit TaggerDiscourseScorer(const TaggerModel& model) : model_(model) {}
  int num_labels() const override;
  Eigen::MatrixXd distributions(const Abstract& abstract) const override;

 private:
  const TaggerModel& model_;
};

class UniformDiscourseScorer : public DiscourseScorer {
 public:
  explicit UniformDiscourseScorer(int k) : k_(k) {}
  int num_labels() const override { return k_; }
  Eigen::MatrixXd distributions(const Abstract& abstract) const override;

 private:
  int k_;
};

// [sif ; distribution row `index`], length D + K.
Eigen::VectorXd features_with_discourse(const Eigen::VectorXd& sif,
                                        const Eigen::MatrixXd& distributions, std::size_t index);
Eigen::VectorXd features_with_discourse(const Eigen::VectorXd& sif, const DiscourseScorer& scorer,
                                        const Abstract& abstract, std::size_t index);

// ---------------------------------------------------------------------------
// SIF + logistic regression claim classifier

struct SifClassifierConfig {
  SifConfig sif;
  LogRegConfig logreg;
  double threshold = 0.5;
};

class SifClaimClassifier {
 public:
  // The principal component is fit on training sentences only. `scorer`, when
  // given, must outlive the classifier.
  static SifClaimClassifier train(const std::vector<ClaimAbstract>& train, Vocabulary vocab,
                                  WordFrequencies freq, Eigen::MatrixXd table,
                                  const DiscourseScorer* scorer,
                                  const SifClassifierConfig& cfg = {});

  std::vector<double> probabilities(const Abstract& abstract) const;
  std::vector<bool> predict(const Abstract& abstract) const;

  const LogRegModel& logreg() const { return logreg_; }
  const PrincipalComponent<double>& component() const { return pc_; }

 private:
  SifClaimClassifier() = default;
  Eigen::MatrixXd features(const Abstract& abstract) const;

  SifClassifierConfig cfg_;
  Vocabulary vocab_;
  WordFrequencies freq_;
  Eigen::MatrixXd table_;
  const DiscourseScorer* scorer_ = nullptr;
  PrincipalComponent<double> pc_;
  LogRegModel logreg_;
};

}  // namespace claimx

#endif  // CLAIMX_BASELINES_HPP_

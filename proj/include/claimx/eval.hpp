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

#ifndef CLAIMX_EVAL_HPP_
#define CLAIMX_EVAL_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "claimx/corpus.hpp"

namespace claimx {

struct BinaryCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  BinaryCounts& operator+=(const BinaryCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
};

// Positive class = claim. A zero denominator yields 0 and sets `degenerate`.
struct Prf1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool degenerate = false;
  BinaryCounts counts;
};

BinaryCounts count_binary(const std::vector<bool>& predictions, const std::vector<bool>& golds);
Prf1 prf1(const BinaryCounts& counts);
Prf1 prf1(const std::vector<bool>& predictions, const std::vector<bool>& golds);

struct Kappa {
  double value = 0.0;
  bool degenerate = false;  // chance agreement is 1 but observed agreement is not
};

// Two raters, categorical labels; chance agreement from marginal products.
Kappa cohen_kappa(const std::vector<int>& a, const std::vector<int>& b);
Kappa cohen_kappa(const std::vector<bool>& a, const std::vector<bool>& b);

// `counts(i, j)` = raters assigning item i to category j; rows must share a
// sum n >= 2.
double fleiss_kappa(const Eigen::MatrixXi& counts);

// Item x {no, yes} count matrix from several raters' binary labels.
Eigen::MatrixXi binary_rating_counts(const std::vector<std::vector<bool>>& raters);

using ClaimPredictor = std::function<std::vector<bool>(const Abstract&)>;

struct AbstractError {
  std::string id;
  std::size_t misclassified = 0;
  std::size_t sentences = 0;
};

struct Evaluation {
  Prf1 metrics;                       // micro-averaged over sentences
  double exact_match_fraction = 0.0;  // abstracts with every sentence right
  std::size_t single_error_abstracts = 0;
  std::vector<AbstractError> errors;  // abstracts with > 1 misclassified sentence
};

Evaluation evaluate_model(const ClaimPredictor& predictor, const std::vector<ClaimAbstract>& split);

struct ReportRow {
  std::string model;
  std::string split;  // "train", "validation", "test"
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct ComparisonReport {
  std::vector<ReportRow> rows;  // sorted by model, then split order
  std::uint64_t seed = 0;
  std::string dataset_hash;
  std::string config_hash;
};

ComparisonReport build_comparison(std::vector<ReportRow> rows, std::uint64_t seed,
                                  std::string dataset_hash, std::string config_hash);
std::string render_table(const ComparisonReport& report);
std::string render_jsonl(const ComparisonReport& report);

}  // namespace claimx

#endif  // CLAIMX_EVAL_HPP_

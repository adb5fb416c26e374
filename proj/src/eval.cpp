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

#include "claimx/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "claimx/tensor.hpp"
#include "json.hpp"

namespace claimx {

BinaryCounts count_binary(const std::vector<bool>& predictions, const std::vector<bool>& golds) {
  if (predictions.size() != golds.size()) {
    throw ContractViolation("prf1: " + std::to_string(predictions.size()) + " predictions for " +
                            std::to_string(golds.size()) + " gold labels");
  }
  BinaryCounts c;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    const bool p = predictions[i], g = golds[i];
    if (p && g) ++c.tp;
    else if (p) ++c.fp;
    else if (g) ++c.fn;
    else ++c.tn;
  }
  return c;
}

Prf1 prf1(const BinaryCounts& c) {
  Prf1 r;
  r.counts = c;
  const auto tp = static_cast<double>(c.tp);
  if (c.tp + c.fp == 0) {
    r.degenerate = true;
  } else {
    r.precision = tp / static_cast<double>(c.tp + c.fp);
  }
  if (c.tp + c.fn == 0) {
    r.degenerate = true;
  } else {
    r.recall = tp / static_cast<double>(c.tp + c.fn);
  }
  if (r.precision + r.recall > 0.0) {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  }
  return r;
}

Prf1 prf1(const std::vector<bool>& predictions, const std::vector<bool>& golds) {
  return prf1(count_binary(predictions, golds));
}

Kappa cohen_kappa(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw ContractViolation("cohen_kappa: sequences differ in length");
  if (a.empty()) throw std::invalid_argument("cohen_kappa: empty input");
  const double n = static_cast<double>(a.size());
  std::map<int, double> ma, mb;
  double agree = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma[a[i]] += 1.0;
    mb[b[i]] += 1.0;
    if (a[i] == b[i]) agree += 1.0;
  }
  const double po = agree / n;
  double pe = 0.0;
  for (const auto& [label, count] : ma) {
    auto it = mb.find(label);
    if (it != mb.end()) pe += (count / n) * (it->second / n);
  }
  Kappa k;
  if (pe >= 1.0) {
    if (po >= 1.0) {
      k.value = 1.0;
    } else {
      k.degenerate = true;
    }
    return k;
  }
  k.value = (po - pe) / (1.0 - pe);
  return k;
}

Kappa cohen_kappa(const std::vector<bool>& a, const std::vector<bool>& b) {
  return cohen_kappa(std::vector<int>(a.begin(), a.end()), std::vector<int>(b.begin(), b.end()));
}

double fleiss_kappa(const Eigen::MatrixXi& counts) {
  const Eigen::Index items = counts.rows();
  if (items == 0 || counts.cols() == 0) throw std::invalid_argument("fleiss_kappa: empty matrix");
  if ((counts.array() < 0).any()) throw std::invalid_argument("fleiss_kappa: negative count");
  const int n = counts.row(0).sum();
  if (n < 2) throw std::invalid_argument("fleiss_kappa: need at least two raters per item");
  for (Eigen::Index i = 1; i < items; ++i) {
    if (counts.row(i).sum() != n) {
      throw std::invalid_argument("fleiss_kappa: item " + std::to_string(i) + " has " +
                                  std::to_string(counts.row(i).sum()) + " ratings, expected " +
                                  std::to_string(n));
    }
  }
  const Eigen::MatrixXd c = counts.cast<double>();
  const double dn = n;
  const Eigen::VectorXd agreement =
      ((c.array() * (c.array() - 1.0)).rowwise().sum() / (dn * (dn - 1.0))).matrix();
  const double p_bar = agreement.mean();
  const Eigen::RowVectorXd p_j = c.colwise().sum() / (static_cast<double>(items) * dn);
  const double p_e = p_j.squaredNorm();
  if (p_e >= 1.0) return p_bar >= 1.0 ? 1.0 : 0.0;
  return (p_bar - p_e) / (1.0 - p_e);
}

Eigen::MatrixXi binary_rating_counts(const std::vector<std::vector<bool>>& raters) {
  if (raters.empty()) return Eigen::MatrixXi(0, 2);
  const std::size_t n = raters.front().size();
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(n), 2);
  for (const auto& r : raters) {
    if (r.size() != n) throw ContractViolation("binary_rating_counts: rater lengths differ");
    for (std::size_t i = 0; i < n; ++i) counts(static_cast<Eigen::Index>(i), r[i] ? 1 : 0) += 1;
  }
  return counts;
}

Evaluation evaluate_model(const ClaimPredictor& predictor, const std::vector<ClaimAbstract>& split) {
  Evaluation ev;
  BinaryCounts total;
  std::size_t exact = 0;
  for (const auto& a : split) {
    const std::vector<bool> pred = predictor(a.abstract);
    const BinaryCounts c = count_binary(pred, a.claims);
    total += c;
    const std::size_t wrong = c.fp + c.fn;
    if (wrong == 0) ++exact;
    if (wrong == 1) ++ev.single_error_abstracts;
    if (wrong > 1) ev.errors.push_back({a.abstract.id, wrong, a.claims.size()});
  }
  ev.metrics = prf1(total);
  ev.exact_match_fraction =
      split.empty() ? 0.0 : static_cast<double>(exact) / static_cast<double>(split.size());
  return ev;
}

namespace {

int split_rank(const std::string& split) {
  if (split == "train") return 0;
  if (split == "val" || split == "validation") return 1;
  if (split == "test") return 2;
  return 3;
}

std::string display_split(const std::string& split) {
  if (split == "train") return "Train";
  if (split == "val" || split == "validation") return "Validation";
  if (split == "test") return "Test";
  return split;
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

ComparisonReport build_comparison(std::vector<ReportRow> rows, std::uint64_t seed,
                                  std::string dataset_hash, std::string config_hash) {
  for (const auto& r : rows) {
    for (double m : {r.precision, r.recall, r.f1}) {
      if (!(m >= 0.0 && m <= 1.0)) throw ContractViolation("report metric outside [0,1] for " + r.model);
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
    if (a.model != b.model) return a.model < b.model;
    const int ra = split_rank(a.split), rb = split_rank(b.split);
    if (ra != rb) return ra < rb;
    return a.split < b.split;
  });
  return {std::move(rows), seed, std::move(dataset_hash), std::move(config_hash)};
}

std::string render_table(const ComparisonReport& report) {
  const std::vector<std::string> header = {"Model", "Split", "Precision", "Recall", "F1"};
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : report.rows) {
    cells.push_back({r.model, display_split(r.split), fixed3(r.precision), fixed3(r.recall),
                     fixed3(r.f1)});
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
  }
  auto line = [&](const std::vector<std::string>& row) {
    std::string out;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out += "  ";
      std::string cell = row[c];
      if (c + 1 < row.size()) cell.resize(width[c], ' ');
      out += cell;
    }
    return out + "\n";
  };
  std::string out = "# seed=" + std::to_string(report.seed) + " dataset=" + report.dataset_hash +
                    " config=" + report.config_hash + "\n";
  out += line(header);
  for (const auto& row : cells) out += line(row);
  return out;
}

std::string render_jsonl(const ComparisonReport& report) {
  std::string out;
  for (const auto& r : report.rows) {
    nlohmann::ordered_json j;
    j["model"] = r.model;
    j["split"] = r.split;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["f1"] = r.f1;
    j["seed"] = report.seed;
    j["dataset_hash"] = report.dataset_hash;
    j["config_hash"] = report.config_hash;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace claimx

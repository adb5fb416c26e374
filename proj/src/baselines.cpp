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

#include "claimx/baselines.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "claimx/checkpoint.hpp"
#include "claimx/tagger.hpp"

#ifndef CLAIMX_DATA_DIR
#define CLAIMX_DATA_DIR "data"
#endif

namespace claimx {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::vector<std::string> split_bar(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t bar = s.find('|', start);
    std::string part = s.substr(start, bar == std::string::npos ? std::string::npos : bar - start);
    if (!part.empty()) out.push_back(part);
    if (bar == std::string::npos) break;
    start = bar + 1;
  }
  return out;
}

std::string lower_ascii(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool match_from(const std::vector<PatternElement>& el, std::size_t i,
                const std::vector<std::string>& tokens, std::size_t pos) {
  if (i == el.size()) return true;
  const PatternElement& e = el[i];
  switch (e.kind) {
    case PatternElement::Kind::kGap:
      for (int k = 0; k <= RuleSet::kMaxGap && pos + static_cast<std::size_t>(k) <= tokens.size();
           ++k) {
        if (match_from(el, i + 1, tokens, pos + static_cast<std::size_t>(k))) return true;
      }
      return false;
    case PatternElement::Kind::kWildcard:
      return pos < tokens.size() && match_from(el, i + 1, tokens, pos + 1);
    case PatternElement::Kind::kAlternatives:
      if (pos >= tokens.size()) return false;
      if (std::find(e.alternatives.begin(), e.alternatives.end(), tokens[pos]) ==
          e.alternatives.end()) {
        return false;
      }
      return match_from(el, i + 1, tokens, pos + 1);
  }
  return false;
}

bool matches(const Rule& rule, const std::vector<std::string>& tokens) {
  for (std::size_t start = 0; start < tokens.size(); ++start) {
    if (match_from(rule.elements, 0, tokens, start)) return true;
  }
  return false;
}

}  // namespace

RuleSet RuleSet::parse(std::string_view text) {
  RuleSet rs;
  std::map<std::string, std::vector<std::string>> classes;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw FormatError("rule line without a directive", line_no);
    const std::string directive = trim(std::string_view(line).substr(0, colon));
    const std::string body = trim(std::string_view(line).substr(colon + 1));
    if (body.empty()) throw FormatError("empty " + directive + " rule", line_no);

    if (directive == "class") {
      const auto eq = body.find('=');
      if (eq == std::string::npos) throw FormatError("class rule needs NAME = tokens", line_no);
      const std::string name = trim(std::string_view(body).substr(0, eq));
      std::vector<std::string> members;
      for (const auto& w : split_ws(std::string_view(body).substr(eq + 1))) {
        for (const auto& alt : split_bar(w)) members.push_back(lower_ascii(alt));
      }
      if (name.empty() || members.empty()) throw FormatError("empty class definition", line_no);
      classes[name] = std::move(members);
    } else if (directive == "keyword") {
      Rule r{line, {}};
      for (auto& tok : tokenize(body)) {
        r.elements.push_back({PatternElement::Kind::kAlternatives, {std::move(tok)}});
      }
      if (r.elements.empty()) throw FormatError("keyword has no tokens", line_no);
      rs.keywords_.push_back(std::move(r));
    } else if (directive == "pattern") {
      Rule r{line, {}};
      bool literal = false;
      for (const auto& slot : split_ws(body)) {
        PatternElement e;
        if (slot == "*") {
          e.kind = PatternElement::Kind::kWildcard;
        } else if (slot == "...") {
          e.kind = PatternElement::Kind::kGap;
        } else if (slot[0] == '@') {
          auto it = classes.find(slot.substr(1));
          if (it == classes.end()) throw FormatError("undefined class " + slot, line_no);
          e.alternatives = it->second;
          literal = true;
        } else {
          for (const auto& alt : split_bar(slot)) e.alternatives.push_back(lower_ascii(alt));
          if (e.alternatives.empty()) throw FormatError("empty pattern slot", line_no);
          literal = true;
        }
        r.elements.push_back(std::move(e));
      }
      if (!literal) throw FormatError("pattern needs at least one token slot", line_no);
      rs.patterns_.push_back(std::move(r));
    } else {
      throw FormatError("unknown rule directive '" + directive + "'", line_no);
    }
  }
  if (rs.size() == 0) throw FormatError("rule set defines no rules", line_no);
  return rs;
}

RuleSet RuleSet::load(const std::string& path) { return parse(read_file(path)); }

std::string RuleSet::default_rules_path() {
  return std::string(CLAIMX_DATA_DIR) + "/default_rules.txt";
}

RuleSet RuleSet::default_rules() { return load(default_rules_path()); }

const Rule* RuleSet::first_match(const std::vector<std::string>& tokens) const {
  for (const auto& r : keywords_) {
    if (matches(r, tokens)) return &r;
  }
  for (const auto& r : patterns_) {
    if (matches(r, tokens)) return &r;
  }
  return nullptr;
}

bool rule_based_extract(const std::vector<std::string>& tokens, const RuleSet& rules) {
  return rules.first_match(tokens) != nullptr;
}

std::vector<bool> rule_based_extract(const Abstract& abstract, const RuleSet& rules) {
  std::vector<bool> out;
  out.reserve(abstract.sentences.size());
  for (const auto& s : abstract.sentences) out.push_back(rule_based_extract(tokenize(s), rules));
  return out;
}

std::vector<bool> last_sentence_baseline(const Abstract& abstract) {
  if (abstract.sentences.empty()) throw ContractViolation("abstract has no sentences");
  std::vector<bool> out(abstract.sentences.size(), false);
  out.back() = true;
  return out;
}

// ---------------------------------------------------------------------------

WordFrequencies::WordFrequencies(std::unordered_map<std::string, std::int64_t> counts)
    : counts_(std::move(counts)) {
  for (const auto& [tok, c] : counts_) {
    if (c < 0) throw ContractViolation("negative count for '" + tok + "'");
    total_ += c;
  }
}

WordFrequencies WordFrequencies::from_vocabulary(const Vocabulary& vocab) {
  return WordFrequencies(vocab.counts());
}

WordFrequencies WordFrequencies::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open frequency file " + path);
  std::unordered_map<std::string, std::int64_t> counts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (fields.size() != 2) throw FormatError("expected 'token count'", line_no);
    std::int64_t c = 0;
    try {
      std::size_t used = 0;
      c = std::stoll(fields[1], &used);
      if (used != fields[1].size() || c < 0) throw std::invalid_argument("count");
    } catch (const std::exception&) {
      throw FormatError("bad count '" + fields[1] + "'", line_no);
    }
    counts[fields[0]] += c;
  }
  return WordFrequencies(std::move(counts));
}

double WordFrequencies::probability(std::string_view token) const {
  if (total_ == 0) return 0.0;
  auto it = counts_.find(std::string(token));
  return it == counts_.end() ? 0.0
                             : static_cast<double>(it->second) / static_cast<double>(total_);
}

SifEmbedding sif_embed(const std::vector<std::string>& tokens, const WordFrequencies& freq,
                       const Vocabulary& vocab, const Eigen::MatrixXd& table,
                       const SifConfig& cfg) {
  if (!(cfg.a > 0.0)) throw ContractViolation("SIF smoothing a must be positive");
  if (table.rows() != static_cast<Eigen::Index>(vocab.size())) {
    throw ContractViolation("embedding table rows differ from vocabulary size");
  }
  SifEmbedding out{Eigen::VectorXd::Zero(table.cols()), tokens.empty()};
  if (tokens.empty()) return out;
  for (const auto& tok : tokens) {
    const bool known = vocab.contains(tok);
    const double p = known ? freq.probability(tok) : 0.0;
    const int id = known ? vocab.id(tok) : Vocabulary::kUnk;
    out.vector += sif_weight(p, cfg.a) * table.row(id).transpose();
  }
  out.vector /= static_cast<double>(tokens.size());
  return out;
}

// ---------------------------------------------------------------------------

namespace {

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

void check_logreg_inputs(const LogRegModel& model, const Eigen::MatrixXd& x,
                         const std::vector<bool>& y) {
  if (static_cast<Eigen::Index>(y.size()) != x.rows()) {
    throw ContractViolation("logistic regression: " + std::to_string(y.size()) + " labels for " +
                            std::to_string(x.rows()) + " rows");
  }
  if (model.w.size() != x.cols()) {
    throw ContractViolation("logistic regression: weight dimension " +
                            std::to_string(model.w.size()) + " differs from feature dimension " +
                            std::to_string(x.cols()));
  }
  if (!x.allFinite()) throw ContractViolation("logistic regression: non-finite features");
  if (model.lambda < 0.0) throw ContractViolation("logistic regression: negative lambda");
}

}  // namespace

LogRegObjective logreg_objective(const LogRegModel& model, const Eigen::MatrixXd& features,
                                 const std::vector<bool>& labels) {
  check_logreg_inputs(model, features, labels);
  const Eigen::Index n = features.rows();
  LogRegObjective obj;
  obj.grad_w = model.lambda * model.w;
  obj.loss = 0.5 * model.lambda * model.w.squaredNorm();
  if (n == 0) return obj;
  const Eigen::VectorXd z = (features * model.w).array() + model.b;
  Eigen::VectorXd residual(n);
  double log_loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double y = labels[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
    // -[y log s(z) + (1-y) log(1-s(z))] = softplus(z) - y z
    log_loss += softplus(z(i)) - y * z(i);
    residual(i) = sigmoid(z(i)) - y;
  }
  obj.loss += log_loss / static_cast<double>(n);
  obj.grad_w += features.transpose() * residual / static_cast<double>(n);
  obj.grad_b = residual.mean();
  return obj;
}

LogRegModel train_logreg(const Eigen::MatrixXd& features, const std::vector<bool>& labels,
                         const LogRegConfig& cfg, std::vector<double>* loss_history) {
  if (cfg.lambda < 0.0 || cfg.epochs < 0 || !(cfg.lr > 0.0)) {
    throw ContractViolation("logistic regression: bad config");
  }
  LogRegModel m{Eigen::VectorXd::Zero(features.cols()), 0.0, cfg.lambda};
  check_logreg_inputs(m, features, labels);
  for (int e = 0; e < cfg.epochs; ++e) {
    const LogRegObjective obj = logreg_objective(m, features, labels);
    if (loss_history != nullptr) loss_history->push_back(obj.loss);
    m.w -= cfg.lr * obj.grad_w;
    m.b -= cfg.lr * obj.grad_b;
  }
  return m;
}

double predict_logreg(const LogRegModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.w.size()) {
    throw ContractViolation("logistic regression: feature dimension " + std::to_string(x.size()) +
                            " differs from weight dimension " + std::to_string(model.w.size()));
  }
  return sigmoid(model.w.dot(x) + model.b);
}

// ---------------------------------------------------------------------------

int TaggerDiscourseScorer::num_labels() const { return model_.num_labels(); }

Eigen::MatrixXd TaggerDiscourseScorer::distributions(const Abstract& abstract) const {
  return model_.probabilities(model_.encode(abstract));
}

Eigen::MatrixXd UniformDiscourseScorer::distributions(const Abstract& abstract) const {
  return Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(abstract.sentences.size()), k_,
                                   1.0 / k_);
}

Eigen::VectorXd features_with_discourse(const Eigen::VectorXd& sif,
                                        const Eigen::MatrixXd& distributions, std::size_t index) {
  if (static_cast<Eigen::Index>(index) >= distributions.rows()) {
    throw ContractViolation("sentence index " + std::to_string(index) + " out of range");
  }
  Eigen::VectorXd out(sif.size() + distributions.cols());
  out << sif, distributions.row(static_cast<Eigen::Index>(index)).transpose();
  return out;
}

Eigen::VectorXd features_with_discourse(const Eigen::VectorXd& sif, const DiscourseScorer& scorer,
                                        const Abstract& abstract, std::size_t index) {
  return features_with_discourse(sif, scorer.distributions(abstract), index);
}

// ---------------------------------------------------------------------------

SifClaimClassifier SifClaimClassifier::train(const std::vector<ClaimAbstract>& train,
                                             Vocabulary vocab, WordFrequencies freq,
                                             Eigen::MatrixXd table, const DiscourseScorer* scorer,
                                             const SifClassifierConfig& cfg) {
  SifClaimClassifier c;
  c.cfg_ = cfg;
  c.vocab_ = std::move(vocab);
  c.freq_ = std::move(freq);
  c.table_ = std::move(table);
  c.scorer_ = scorer;

  std::vector<Eigen::VectorXd> rows;
  std::vector<bool> labels;
  for (const auto& a : train) {
    for (std::size_t i = 0; i < a.abstract.sentences.size(); ++i) {
      rows.push_back(
          sif_embed(tokenize(a.abstract.sentences[i]), c.freq_, c.vocab_, c.table_, cfg.sif)
              .vector);
      labels.push_back(a.claims.at(i));
    }
  }
  Eigen::MatrixXd raw(static_cast<Eigen::Index>(rows.size()), c.table_.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) raw.row(static_cast<Eigen::Index>(i)) = rows[i];
  c.pc_ = remove_first_pc(raw);

  Eigen::MatrixXd x(raw.rows(), raw.cols() + (scorer ? scorer->num_labels() : 0));
  Eigen::Index r = 0;
  for (const auto& a : train) {
    const Eigen::MatrixXd f = c.features(a.abstract);
    x.middleRows(r, f.rows()) = f;
    r += f.rows();
  }
  c.logreg_ = train_logreg(x, labels, cfg.logreg);
  return c;
}

Eigen::MatrixXd SifClaimClassifier::features(const Abstract& abstract) const {
  const auto n = static_cast<Eigen::Index>(abstract.sentences.size());
  const Eigen::Index d = table_.cols();
  const Eigen::Index k = scorer_ ? scorer_->num_labels() : 0;
  Eigen::MatrixXd out(n, d + k);
  Eigen::MatrixXd dist;
  if (scorer_ != nullptr) dist = scorer_->distributions(abstract);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd v = pc_.remove(
        sif_embed(tokenize(abstract.sentences[static_cast<std::size_t>(i)]), freq_, vocab_, table_,
                  cfg_.sif)
            .vector);
    if (scorer_ != nullptr) {
      out.row(i) = features_with_discourse(v, dist, static_cast<std::size_t>(i)).transpose();
    } else {
      out.row(i) = v.transpose();
    }
  }
  return out;
}

std::vector<double> SifClaimClassifier::probabilities(const Abstract& abstract) const {
  const Eigen::MatrixXd f = features(abstract);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < f.rows(); ++i) out.push_back(predict_logreg(logreg_, f.row(i)));
  return out;
}

std::vector<bool> SifClaimClassifier::predict(const Abstract& abstract) const {
  std::vector<bool> out;
  for (double p : probabilities(abstract)) out.push_back(p >= cfg_.threshold);
  return out;
}

}  // namespace claimx

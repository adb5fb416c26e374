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

#include "claimx/corpus.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "claimx/checkpoint.hpp"
#include "claimx/text.hpp"
#include "json.hpp"

namespace claimx {

int DiscourseCorpus::label_id(std::string_view name) const {
  for (std::size_t i = 0; i < label_names.size(); ++i) {
    if (label_names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

// ---------------------------------------------------------------------------
// Discourse corpus

DiscourseCorpus parse_discourse_text(std::string_view text) {
  DiscourseCorpus corpus;
  std::optional<DiscourseAbstract> current;
  auto flush = [&] {
    if (!current) return;
    if (current->abstract.sentences.empty()) {
      ++corpus.skipped_blocks;
    } else {
      corpus.abstracts.push_back(std::move(*current));
    }
    current.reset();
  };

  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      flush();
      continue;
    }
    if (line.starts_with("###")) {
      flush();
      current.emplace();
      current->abstract.id = std::string(line.substr(3));
      continue;
    }
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw FormatError("expected LABEL<TAB>sentence", lineno);
    }
    if (!current) throw FormatError("sentence line before any ### header", lineno);
    const std::string label(line.substr(0, tab));
    const std::string sentence(line.substr(tab + 1));
    if (label.empty() || sentence.empty()) throw FormatError("empty label or sentence", lineno);
    int id = corpus.label_id(label);
    if (id < 0) {
      id = static_cast<int>(corpus.label_names.size());
      corpus.label_names.push_back(label);
    }
    current->abstract.sentences.push_back(sentence);
    current->labels.push_back(id);
  }
  flush();

  std::set<std::string> ids;
  for (const auto& a : corpus.abstracts) {
    if (!ids.insert(a.abstract.id).second) {
      throw IntegrityError(a.abstract.id, "duplicate abstract id " + a.abstract.id);
    }
  }
  return corpus;
}

DiscourseCorpus parse_discourse_corpus(const std::string& path) {
  return parse_discourse_text(read_file(path));
}

std::string serialize_discourse_corpus(const DiscourseCorpus& corpus) {
  std::string out;
  for (std::size_t i = 0; i < corpus.abstracts.size(); ++i) {
    const auto& a = corpus.abstracts[i];
    if (i > 0) out += '\n';
    out += "###" + a.abstract.id + '\n';
    for (std::size_t s = 0; s < a.abstract.sentences.size(); ++s) {
      out += corpus.label_names.at(static_cast<std::size_t>(a.labels[s]));
      out += '\t';
      out += a.abstract.sentences[s];
      out += '\n';
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Claim corpus

namespace {

std::vector<bool> parse_labels(const nlohmann::json& j, const std::string& abstract_id) {
  if (!j.is_array()) throw IntegrityError(abstract_id, "labels must be an array");
  std::vector<bool> out;
  for (const auto& v : j) {
    if (v.is_boolean()) {
      out.push_back(v.get<bool>());
    } else if (v.is_number_integer() && (v.get<int>() == 0 || v.get<int>() == 1)) {
      out.push_back(v.get<int>() == 1);
    } else {
      throw IntegrityError(abstract_id, "labels must be booleans or 0/1 in " + abstract_id);
    }
  }
  return out;
}

ClaimRecord parse_claim_line(std::string_view line, std::size_t lineno) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what(), lineno);
  }
  if (!j.is_object() || !j.contains("id") || !j.contains("sentences")) {
    throw FormatError("record needs \"id\" and \"sentences\"", lineno);
  }
  ClaimRecord r;
  try {
    r.abstract.id = j.at("id").is_string() ? j.at("id").get<std::string>()
                                           : j.at("id").dump();
    r.abstract.title = j.value("title", "");
    r.abstract.sentences = j.at("sentences").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad record field: ") + e.what(), lineno);
  }
  const std::string& id = r.abstract.id;
  const std::size_t n = r.abstract.sentences.size();
  if (n == 0) throw IntegrityError(id, "abstract " + id + " has no sentences");

  std::set<std::string> annotators;
  for (const auto& a : j.value("annotations", nlohmann::json::array())) {
    AnnotationRecord rec;
    rec.abstract_id = id;
    rec.annotator_id = a.at("annotator_id").get<std::string>();
    rec.labels = parse_labels(a.at("labels"), id);
    rec.timestamp = a.value("timestamp", "");
    if (rec.labels.size() != n) {
      throw IntegrityError(id, "abstract " + id + ": annotator " + rec.annotator_id + " has " +
                                   std::to_string(rec.labels.size()) + " labels for " +
                                   std::to_string(n) + " sentences");
    }
    if (!annotators.insert(rec.annotator_id).second) {
      throw IntegrityError(id, "abstract " + id + ": duplicate annotator " + rec.annotator_id);
    }
    r.annotations.push_back(std::move(rec));
  }
  if (j.contains("gold_labels") && !j.at("gold_labels").is_null()) {
    auto gold = parse_labels(j.at("gold_labels"), id);
    if (gold.size() != n) {
      throw IntegrityError(id, "abstract " + id + ": gold_labels length " +
                                   std::to_string(gold.size()) + " != " + std::to_string(n));
    }
    r.gold_labels = std::move(gold);
  }
  return r;
}

}  // namespace

std::vector<ClaimRecord> parse_claim_text(std::string_view text) {
  std::vector<ClaimRecord> out;
  std::set<std::string> ids;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    ClaimRecord r = parse_claim_line(line, lineno);
    if (!ids.insert(r.abstract.id).second) {
      throw IntegrityError(r.abstract.id, "duplicate abstract id " + r.abstract.id);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ClaimRecord> parse_claim_corpus(const std::string& path) {
  return parse_claim_text(read_file(path));
}

std::string serialize_claim_record(const ClaimRecord& r) {
  nlohmann::ordered_json j;
  j["v"] = 1;
  j["id"] = r.abstract.id;
  j["title"] = r.abstract.title;
  j["sentences"] = r.abstract.sentences;
  auto anns = nlohmann::ordered_json::array();
  for (const auto& a : r.annotations) {
    nlohmann::ordered_json aj;
    aj["annotator_id"] = a.annotator_id;
    aj["labels"] = a.labels;
    if (!a.timestamp.empty()) aj["timestamp"] = a.timestamp;
    anns.push_back(std::move(aj));
  }
  j["annotations"] = std::move(anns);
  if (r.gold_labels) j["gold_labels"] = *r.gold_labels;
  return j.dump();
}

std::string serialize_claim_corpus(const std::vector<ClaimRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += serialize_claim_record(r);
    out += '\n';
  }
  return out;
}

VoteResult majority_vote(std::span<const AnnotationRecord> records) {
  if (records.empty()) throw std::invalid_argument("majority_vote needs at least one record");
  const std::size_t n = records.front().labels.size();
  for (const auto& r : records) {
    if (r.labels.size() != n) {
      throw IntegrityError(r.abstract_id, "annotation lengths differ for " + r.abstract_id);
    }
  }
  VoteResult out;
  out.labels.resize(n);
  const std::size_t voters = records.size();
  for (std::size_t s = 0; s < n; ++s) {
    std::size_t yes = 0;
    for (const auto& r : records) yes += r.labels[s] ? 1 : 0;
    out.labels[s] = 2 * yes > voters;
    if (2 * yes == voters) out.ties.push_back(s);
  }
  return out;
}

std::vector<bool> gold_claims(const ClaimRecord& record) {
  if (record.gold_labels) return *record.gold_labels;
  if (record.annotations.empty()) {
    throw IntegrityError(record.abstract.id,
                         "abstract " + record.abstract.id + " has neither gold labels nor annotations");
  }
  return majority_vote(record.annotations).labels;
}

std::vector<ClaimAbstract> to_claim_abstracts(const std::vector<ClaimRecord>& records) {
  std::vector<ClaimAbstract> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back({r.abstract, gold_claims(r)});
  return out;
}

// ---------------------------------------------------------------------------
// Splits and statistics

SplitSizes split_sizes(std::size_t n, const SplitSpec& spec) {
  if (spec.train_fraction < 0 || spec.val_fraction < 0 ||
      spec.train_fraction + spec.val_fraction > 1.0 + 1e-12) {
    throw std::invalid_argument("split fractions must be non-negative and sum to at most 1");
  }
  const double dn = static_cast<double>(n);
  SplitSizes s;
  s.train = static_cast<std::size_t>(std::floor(spec.train_fraction * dn + 1e-9));
  s.val = static_cast<std::size_t>(std::floor(spec.val_fraction * dn + 1e-9));
  s.train = std::min(s.train, n);
  s.val = std::min(s.val, n - s.train);
  s.test = n - s.train - s.val;
  return s;
}

std::vector<std::size_t> split_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

CorpusStats corpus_stats(const std::vector<ClaimAbstract>& corpus) {
  CorpusStats st;
  st.abstracts = corpus.size();
  for (const auto& a : corpus) {
    const std::size_t n = a.claims.size();
    st.sentences += n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!a.claims[i]) continue;
      ++st.claims;
      if (i + 1 == n) ++st.last_sentence_claims;
      // ceil(10 (i+1) / n) - 1 in integer arithmetic.
      const std::size_t bin = (10 * (i + 1) + n - 1) / n - 1;
      ++st.decile_histogram[std::min<std::size_t>(bin, 9)];
    }
  }
  st.last_sentence_fraction =
      st.claims == 0 ? 0.0
                     : static_cast<double>(st.last_sentence_claims) / static_cast<double>(st.claims);
  return st;
}

}  // namespace claimx

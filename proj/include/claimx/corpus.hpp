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

#ifndef CLAIMX_CORPUS_HPP_
#define CLAIMX_CORPUS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace claimx {

struct Abstract {
  std::string id;
  std::string title;
  std::vector<std::string> sentences;
};

struct DiscourseAbstract {
  Abstract abstract;
  std::vector<int> labels;  // indices into DiscourseCorpus::label_names
};

struct DiscourseCorpus {
  std::vector<std::string> label_names;  // first-appearance order
  std::vector<DiscourseAbstract> abstracts;
  std::size_t skipped_blocks = 0;  // header lines with no sentences

  // -1 when absent.
  int label_id(std::string_view name) const;
};

// Label/length invariants broken by otherwise well-formed input.
class IntegrityError : public std::runtime_error {
 public:
  IntegrityError(std::string abstract_id, const std::string& what)
      : std::runtime_error(what), abstract_id_(std::move(abstract_id)) {}
  const std::string& abstract_id() const { return abstract_id_; }

 private:
  std::string abstract_id_;
};

// PubMedRCT layout: "###<id>" header, "LABEL\tsentence" lines, blank line
// between abstracts.
DiscourseCorpus parse_discourse_corpus(const std::string& path);
DiscourseCorpus parse_discourse_text(std::string_view text);
std::string serialize_discourse_corpus(const DiscourseCorpus& corpus);

struct AnnotationRecord {
  std::string abstract_id;
  std::string annotator_id;
  std::vector<bool> labels;  // one per sentence
  std::string timestamp;     // ISO 8601, may be empty
};

struct ClaimRecord {
  Abstract abstract;
  std::vector<AnnotationRecord> annotations;
  std::optional<std::vector<bool>> gold_labels;
};

// One JSON object per line:
//   {"v":1,"id":..,"title":..,"sentences":[..],
//    "annotations":[{"annotator_id":..,"labels":[..],"timestamp":..}],
//    "gold_labels":[..]}
// Labels may be JSON booleans or 0/1.
std::vector<ClaimRecord> parse_claim_corpus(const std::string& path);
std::vector<ClaimRecord> parse_claim_text(std::string_view text);
std::string serialize_claim_record(const ClaimRecord& record);
std::string serialize_claim_corpus(const std::vector<ClaimRecord>& records);

struct VoteResult {
  std::vector<bool> labels;
  std::vector<std::size_t> ties;  // sentence indices with an exact tie (-> not claim)
};

// Claim iff strictly more than half of the annotators marked the sentence.
VoteResult majority_vote(std::span<const AnnotationRecord> records);

struct ClaimAbstract {
  Abstract abstract;
  std::vector<bool> claims;
};

// Stored gold labels when present, otherwise the majority vote.
std::vector<bool> gold_claims(const ClaimRecord& record);
std::vector<ClaimAbstract> to_claim_abstracts(const std::vector<ClaimRecord>& records);

struct SplitSpec {
  std::uint64_t seed = 0;
  double train_fraction = 0.50;
  double val_fraction = 0.25;  // test takes the remainder
};

template <typename T>
struct Splits {
  std::vector<T> train;
  std::vector<T> val;
  std::vector<T> test;
};

struct SplitSizes {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

SplitSizes split_sizes(std::size_t n, const SplitSpec& spec);

// Seeded shuffle of item order, then floor(train*n), floor(val*n), remainder.
std::vector<std::size_t> split_permutation(std::size_t n, std::uint64_t seed);

template <typename T>
Splits<T> make_splits(const std::vector<T>& corpus, const SplitSpec& spec) {
  const SplitSizes sizes = split_sizes(corpus.size(), spec);
  const std::vector<std::size_t> order = split_permutation(corpus.size(), spec.seed);
  Splits<T> out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const T& item = corpus[order[i]];
    if (i < sizes.train) {
      out.train.push_back(item);
    } else if (i < sizes.train + sizes.val) {
      out.val.push_back(item);
    } else {
      out.test.push_back(item);
    }
  }
  return out;
}

struct CorpusStats {
  std::size_t abstracts = 0;
  std::size_t sentences = 0;
  std::size_t claims = 0;
  std::size_t last_sentence_claims = 0;
  double last_sentence_fraction = 0.0;  // of all claims
  // Relative position (i+1)/n of each claim, binned into (0,.1], ..., (.9,1].
  std::array<std::size_t, 10> decile_histogram{};
};

CorpusStats corpus_stats(const std::vector<ClaimAbstract>& corpus);

}  // namespace claimx

#endif  // CLAIMX_CORPUS_HPP_

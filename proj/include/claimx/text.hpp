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

#ifndef CLAIMX_TEXT_HPP_
#define CLAIMX_TEXT_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace claimx {

class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Unicode NFC normalization of UTF-8 text. Invalid UTF-8 is passed through
// with replacement characters.
std::string nfc_normalize(std::string_view text);

// Byte offsets into the NFC-normalized text; `text` is [start, end).
struct SentenceSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string text;
};

// Lowercased abbreviations (without the final period) that never end a
// sentence. Two-word entries are matched against the last two words.
const std::vector<std::string>& default_abbreviations();

std::vector<SentenceSpan> split_sentences(std::string_view text);

// Lowercased runs of letters/digits; every other visible character is its own
// token. Whitespace separates.
std::vector<std::string> tokenize(std::string_view sentence);

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  inline static const std::string kPadToken = "<pad>";
  inline static const std::string kUnkToken = "<unk>";

  Vocabulary();

  // Tokens with count >= min_count get ids, ordered by descending count then
  // lexicographically. Counts are retained for every token seen.
  static Vocabulary build(const std::vector<std::vector<std::string>>& sequences,
                          int min_count);
  // Rebuilds a vocabulary from its id-ordered token list (reserved tokens
  // included) and optional counts.
  static Vocabulary from_tokens(const std::vector<std::string>& tokens,
                                std::unordered_map<std::string, std::int64_t> counts = {});

  int id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::int64_t count(std::string_view token) const;
  std::int64_t total_count() const { return total_; }
  const std::unordered_map<std::string, std::int64_t>& counts() const { return counts_; }

  std::vector<int> encode(const std::vector<std::string>& tokens) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  std::unordered_map<std::string, std::int64_t> counts_;
  std::int64_t total_ = 0;
};

struct EmbeddingTable {
  int dim = 0;
  Eigen::MatrixXd matrix;  // vocab size x dim, aligned to Vocabulary ids
  double coverage = 0.0;   // fraction of non-reserved tokens found in the file
};

inline constexpr double kOovInitRange = 0.05;

// GloVe text format (`token v1 ... vD` per line); a leading `V D` header line
// is detected and skipped. Rows missing from the file are drawn from
// U(-0.05, 0.05) seeded by `seed`; the PAD row is zero.
EmbeddingTable load_embeddings(const std::string& path, const Vocabulary& vocab,
                               std::uint64_t seed);
EmbeddingTable load_embeddings(std::istream& in, const Vocabulary& vocab, std::uint64_t seed);

// Table with every row random (used when no pretrained file is given).
EmbeddingTable random_embeddings(const Vocabulary& vocab, int dim, std::uint64_t seed);

}  // namespace claimx

#endif  // CLAIMX_TEXT_HPP_

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

#include "claimx/text.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <random>
#include <sstream>

namespace claimx {

std::string nfc_normalize(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalizer unavailable");
  const auto src = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  if (nfc->isNormalized(src, status) && U_SUCCESS(status)) return std::string(text);
  status = U_ZERO_ERROR;
  icu::UnicodeString dst = nfc->normalize(src, status);
  if (U_FAILURE(status)) throw std::runtime_error("NFC normalization failed");
  std::string out;
  dst.toUTF8String(out);
  return out;
}

const std::vector<std::string>& default_abbreviations() {
  static const std::vector<std::string> abbrevs = {
      "fig",  "figs", "e.g",  "i.e", "et al", "vs",  "approx", "cf",   "ca",
      "no",   "nos",  "ref",  "refs", "eq",   "eqs", "dr",     "mr",   "mrs",
      "ms",   "prof", "vol",  "pp",   "resp", "viz", "incl",   "sp",   "spp",
      "tab",  "suppl", "min", "max",  "approx", "al", "jr",    "sr",   "st"};
  return abbrevs;
}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_ascii_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}
bool is_word_byte(char c) { return is_ascii_alnum(c) || static_cast<unsigned char>(c) >= 0x80; }
bool is_closer(char c) { return c == ')' || c == ']' || c == '"' || c == '\''; }

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

// Word (letters, digits, inner periods) that ends right before `pos`.
std::string_view word_before(std::string_view text, std::size_t pos) {
  std::size_t b = pos;
  while (b > 0 && (is_word_byte(text[b - 1]) || text[b - 1] == '.')) --b;
  std::string_view w = text.substr(b, pos - b);
  while (!w.empty() && w.front() == '.') w.remove_prefix(1);
  return w;
}

bool is_abbreviation(std::string_view text, std::size_t period) {
  const std::string_view w = word_before(text, period);
  if (w.empty()) return false;
  const std::string lw = lower_ascii(w);
  const auto& abbrevs = default_abbreviations();
  if (std::find(abbrevs.begin(), abbrevs.end(), lw) != abbrevs.end()) return true;
  // Single-letter initial such as "J. Smith".
  if (w.size() == 1 && w[0] >= 'A' && w[0] <= 'Z') return true;
  // Two-word abbreviations ("et al").
  std::size_t b = period - w.size();
  while (b > 0 && is_space(text[b - 1])) --b;
  if (b == period - w.size()) return false;
  const std::string_view prev = word_before(text, b);
  if (prev.empty()) return false;
  const std::string two = lower_ascii(prev) + " " + lw;
  return std::find(abbrevs.begin(), abbrevs.end(), two) != abbrevs.end();
}

void push_span(std::vector<SentenceSpan>& out, std::string_view text, std::size_t start,
               std::size_t end) {
  while (start < end && is_space(text[start])) ++start;
  while (end > start && is_space(text[end - 1])) --end;
  if (start < end) out.push_back({start, end, std::string(text.substr(start, end - start))});
}

}  // namespace

std::vector<SentenceSpan> split_sentences(std::string_view raw) {
  const std::string normalized = nfc_normalize(raw);
  const std::string_view text = normalized;
  std::vector<SentenceSpan> spans;
  std::size_t start = 0;
  const std::size_t n = text.size();
  for (std::size_t i = 0; i < n; ++i) {
    const char c = text[i];
    if (c != '.' && c != '?' && c != '!') continue;
    std::size_t j = i + 1;
    while (j < n && (text[j] == '.' || text[j] == '?' || text[j] == '!' || is_closer(text[j]))) ++j;
    if (j >= n) break;
    if (!is_space(text[j])) continue;
    if (c == '.' && j == i + 1 && is_abbreviation(text, i)) continue;
    std::size_t k = j;
    while (k < n && is_space(text[k])) ++k;
    if (k < n && text[k] >= 'a' && text[k] <= 'z') continue;
    push_span(spans, text, start, j);
    start = k;
    i = j - 1;
  }
  push_span(spans, text, start, n);
  return spans;
}

std::vector<std::string> tokenize(std::string_view sentence) {
  std::string lowered;
  icu::UnicodeString::fromUTF8(
      icu::StringPiece(sentence.data(), static_cast<int32_t>(sentence.size())))
      .toLower(icu::Locale::getRoot())
      .toUTF8String(lowered);
  std::vector<std::string> tokens;
  std::size_t i = 0;
  const std::size_t n = lowered.size();
  while (i < n) {
    const char c = lowered[i];
    if (is_space(c)) {
      ++i;
    } else if (is_word_byte(c)) {
      std::size_t j = i;
      while (j < n && is_word_byte(lowered[j])) ++j;
      tokens.emplace_back(lowered.substr(i, j - i));
      i = j;
    } else {
      tokens.emplace_back(1, c);
      ++i;
    }
  }
  return tokens;
}

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary() {
  tokens_ = {kPadToken, kUnkToken};
  index_ = {{kPadToken, kPad}, {kUnkToken, kUnk}};
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& sequences,
                             int min_count) {
  if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");
  Vocabulary v;
  for (const auto& seq : sequences) {
    for (const auto& tok : seq) {
      ++v.counts_[tok];
      ++v.total_;
    }
  }
  std::vector<std::pair<std::string, std::int64_t>> kept;
  for (const auto& [tok, n] : v.counts_) {
    if (n >= min_count && !v.index_.contains(tok)) kept.emplace_back(tok, n);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  for (const auto& [tok, n] : kept) {
    v.index_.emplace(tok, static_cast<int>(v.tokens_.size()));
    v.tokens_.push_back(tok);
  }
  return v;
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens,
                                   std::unordered_map<std::string, std::int64_t> counts) {
  if (tokens.size() < 2 || tokens[kPad] != kPadToken || tokens[kUnk] != kUnkToken) {
    throw std::invalid_argument("vocabulary token list must start with <pad>, <unk>");
  }
  Vocabulary v;
  v.tokens_ = tokens;
  v.index_.clear();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!v.index_.emplace(tokens[i], static_cast<int>(i)).second) {
      throw std::invalid_argument("duplicate vocabulary token: " + tokens[i]);
    }
  }
  v.counts_ = std::move(counts);
  for (const auto& [tok, n] : v.counts_) v.total_ += n;
  return v;
}

int Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.contains(std::string(token));
}

std::int64_t Vocabulary::count(std::string_view token) const {
  auto it = counts_.find(std::string(token));
  return it == counts_.end() ? 0 : it->second;
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

// ---------------------------------------------------------------------------
// Embeddings

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_double(std::string_view s, double& v) {
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && p == s.data() + s.size();
}

bool is_integer(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

EmbeddingTable random_embeddings(const Vocabulary& vocab, int dim, std::uint64_t seed) {
  if (dim <= 0) throw std::invalid_argument("embedding dim must be positive");
  EmbeddingTable table;
  table.dim = dim;
  table.matrix.resize(static_cast<Eigen::Index>(vocab.size()), dim);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-kOovInitRange, kOovInitRange);
  for (Eigen::Index r = 0; r < table.matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) table.matrix(r, c) = dist(rng);
  }
  table.matrix.row(Vocabulary::kPad).setZero();
  return table;
}

EmbeddingTable load_embeddings(std::istream& in, const Vocabulary& vocab, std::uint64_t seed) {
  std::vector<std::pair<int, std::vector<double>>> found;
  int dim = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (lineno == 1 && fields.size() == 2 && is_integer(fields[0]) && is_integer(fields[1])) {
      continue;  // word2vec-style "V D" header
    }
    if (fields.size() < 2) throw FormatError("expected a token followed by values", lineno);
    const int d = static_cast<int>(fields.size()) - 1;
    if (dim == 0) {
      dim = d;
    } else if (d != dim) {
      throw FormatError("expected " + std::to_string(dim) + " values, found " +
                            std::to_string(d),
                        lineno);
    }
    std::vector<double> values(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
      if (!parse_double(fields[static_cast<std::size_t>(k) + 1], values[static_cast<std::size_t>(k)])) {
        throw FormatError("unreadable float '" + std::string(fields[static_cast<std::size_t>(k) + 1]) + "'",
                          lineno);
      }
    }
    const std::string tok(fields[0]);
    if (vocab.contains(tok)) found.emplace_back(vocab.id(tok), std::move(values));
  }
  if (dim == 0) throw FormatError("embedding file contains no vectors", 0);

  EmbeddingTable table = random_embeddings(vocab, dim, seed);
  std::vector<bool> seen(vocab.size(), false);
  std::size_t covered = 0;
  for (auto& [id, values] : found) {
    if (seen[static_cast<std::size_t>(id)]) continue;  // first occurrence wins
    seen[static_cast<std::size_t>(id)] = true;
    table.matrix.row(id) = Eigen::Map<const Eigen::RowVectorXd>(values.data(), dim);
    if (id >= 2) ++covered;
  }
  const std::size_t real = vocab.size() > 2 ? vocab.size() - 2 : 0;
  table.coverage = real == 0 ? 0.0 : static_cast<double>(covered) / static_cast<double>(real);
  return table;
}

EmbeddingTable load_embeddings(const std::string& path, const Vocabulary& vocab,
                               std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embedding file " + path);
  return load_embeddings(in, vocab, seed);
}

}  // namespace claimx

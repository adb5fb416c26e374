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

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "claimx/text.hpp"

namespace claimx {
namespace {

std::vector<std::string> texts(const std::vector<SentenceSpan>& spans) {
  std::vector<std::string> out;
  for (const auto& s : spans) out.push_back(s.text);
  return out;
}

// Spans are ordered, disjoint, match their offsets, and only whitespace lies
// between or around them.
void expect_reconstructs(std::string_view raw) {
  const std::string text = nfc_normalize(raw);
  const auto spans = split_sentences(raw);
  std::size_t pos = 0;
  for (const auto& s : spans) {
    ASSERT_LE(pos, s.start);
    ASSERT_LT(s.start, s.end);
    ASSERT_LE(s.end, text.size());
    EXPECT_EQ(text.substr(s.start, s.end - s.start), s.text);
    for (std::size_t i = pos; i < s.start; ++i) EXPECT_TRUE(std::isspace(static_cast<unsigned char>(text[i])));
    pos = s.end;
  }
  for (std::size_t i = pos; i < text.size(); ++i) EXPECT_TRUE(std::isspace(static_cast<unsigned char>(text[i])));
}

TEST(SplitSentences, PlainCase) {
  EXPECT_EQ(texts(split_sentences("A cat. A dog.")),
            (std::vector<std::string>{"A cat.", "A dog."}));
}

TEST(SplitSentences, DecimalAndAbbreviationGuards) {
  EXPECT_EQ(texts(split_sentences("Mean was 3.5 mm. See Fig. 2 for details.")),
            (std::vector<std::string>{"Mean was 3.5 mm.", "See Fig. 2 for details."}));
}

TEST(SplitSentences, NoTerminalPunctuation) {
  const auto spans = split_sentences("No terminal punctuation");
  ASSERT_EQ(spans.size(), 1u);
  EXPECT_EQ(spans[0].start, 0u);
  EXPECT_EQ(spans[0].end, 23u);
}

TEST(SplitSentences, EmptyAndWhitespace) {
  EXPECT_TRUE(split_sentences("").empty());
  EXPECT_TRUE(split_sentences("  \n\t ").empty());
}

TEST(SplitSentences, InitialsAndMultiWordAbbreviations) {
  EXPECT_EQ(texts(split_sentences("As shown by J. Smith et al. in 2010, it works. Yes!")),
            (std::vector<std::string>{"As shown by J. Smith et al. in 2010, it works.", "Yes!"}));
  EXPECT_EQ(texts(split_sentences("Drugs (e.g. aspirin) help. Is it so? It is.")),
            (std::vector<std::string>{"Drugs (e.g. aspirin) help.", "Is it so?", "It is."}));
}

TEST(SplitSentences, ClosingQuotesStayWithSentence) {
  EXPECT_EQ(texts(split_sentences("He said \"stop.\" Then left.")),
            (std::vector<std::string>{"He said \"stop.\"", "Then left."}));
}

TEST(SplitSentences, ReconstructsSource) {
  expect_reconstructs("  A cat.  A dog.\n\nMean was 3.5 mm. See Fig. 2 for details.  ");
  expect_reconstructs("Café au lait. Café noir? Done");
  std::mt19937_64 rng(5);
  const std::string alphabet = "ab .?!\n3";
  for (int i = 0; i < 200; ++i) {
    std::string s;
    for (int k = 0; k < 40; ++k) s += alphabet[rng() % alphabet.size()];
    expect_reconstructs(s);
  }
}

TEST(Nfc, ComposesCombiningMarks) {
  EXPECT_EQ(nfc_normalize("Café"), "Café");
}

TEST(Tokenize, Examples) {
  EXPECT_EQ(tokenize("CRISPR/Cas works."),
            (std::vector<std::string>{"crispr", "/", "cas", "works", "."}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_EQ(tokenize("a b"), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(tokenize("ÉTUDE p<0.05"),
            (std::vector<std::string>{"étude", "p", "<", "0", ".", "05"}));
}

TEST(Tokenize, IdempotentOnJoinedTokens) {
  for (const char* s : {"CRISPR/Cas works.", "Mean (SD) was 3.5 mm, n=12!", "e.g. x-ray"}) {
    const auto once = tokenize(s);
    std::string joined;
    for (const auto& t : once) joined += t + " ";
    EXPECT_EQ(tokenize(joined), once) << s;
  }
}

TEST(Vocabulary, MinCountThreshold) {
  const Vocabulary v = Vocabulary::build({{"a", "a", "b"}}, 2);
  EXPECT_TRUE(v.contains("a"));
  EXPECT_FALSE(v.contains("b"));
  EXPECT_EQ(v.count("b"), 1);
  EXPECT_EQ(v.id("b"), Vocabulary::kUnk);
  EXPECT_EQ(v.total_count(), 3);
}

TEST(Vocabulary, EmptyCorpusHasReservedTokensOnly) {
  const Vocabulary v = Vocabulary::build({}, 1);
  EXPECT_EQ(v.size(), 2u);
  EXPECT_EQ(v.token(Vocabulary::kPad), Vocabulary::kPadToken);
  EXPECT_EQ(v.token(Vocabulary::kUnk), Vocabulary::kUnkToken);
}

TEST(Vocabulary, OrderedByCountThenToken) {
  const Vocabulary v = Vocabulary::build({{"c", "b", "b", "a", "c", "d"}}, 1);
  EXPECT_EQ(v.tokens(), (std::vector<std::string>{"<pad>", "<unk>", "b", "c", "a", "d"}));
  const Vocabulary r = Vocabulary::from_tokens(v.tokens(), v.counts());
  EXPECT_EQ(r.tokens(), v.tokens());
  EXPECT_EQ(r.id("c"), v.id("c"));
}

TEST(LoadEmbeddings, DirectParse) {
  const Vocabulary v = Vocabulary::build({{"the", "cat"}}, 1);
  std::istringstream in("the 0.1 0.2 0.3\n");
  const EmbeddingTable t = load_embeddings(in, v, 1);
  EXPECT_EQ(t.dim, 3);
  EXPECT_EQ(t.matrix.row(v.id("the")), Eigen::RowVector3d(0.1, 0.2, 0.3));
  EXPECT_DOUBLE_EQ(t.coverage, 0.5);
  EXPECT_EQ(t.matrix.row(Vocabulary::kPad), Eigen::RowVector3d::Zero());
}

TEST(LoadEmbeddings, MissingRowsSeededUniform) {
  const Vocabulary v = Vocabulary::build({{"the", "cat", "dog"}}, 1);
  std::istringstream a("2 3\nthe 0.1 0.2 0.3\nfish 1 1 1\n"), b("the 0.1 0.2 0.3\n");
  const EmbeddingTable ta = load_embeddings(a, v, 42);
  const EmbeddingTable tb = load_embeddings(b, v, 42);
  EXPECT_EQ(ta.matrix, tb.matrix);
  for (const char* w : {"cat", "dog"}) {
    const auto row = ta.matrix.row(v.id(w));
    EXPECT_LE(row.cwiseAbs().maxCoeff(), kOovInitRange);
    EXPECT_GT(row.cwiseAbs().maxCoeff(), 0.0);
  }
  std::istringstream c("the 0.1 0.2 0.3\n");
  EXPECT_NE(load_embeddings(c, v, 43).matrix, ta.matrix);
}

TEST(LoadEmbeddings, InconsistentDimensionNamesLine) {
  const Vocabulary v = Vocabulary::build({{"a"}}, 1);
  std::istringstream in("a 0.1 0.2 0.3\nb 0.1 0.2\n");
  try {
    load_embeddings(in, v, 1);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(LoadEmbeddings, BadFloatIsFormatError) {
  const Vocabulary v = Vocabulary::build({{"a"}}, 1);
  std::istringstream in("a 0.1 zz 0.3\n");
  EXPECT_THROW(load_embeddings(in, v, 1), FormatError);
}

}  // namespace
}  // namespace claimx

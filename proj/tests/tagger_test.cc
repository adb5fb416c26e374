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

#include <algorithm>
#include <cmath>

#include "claimx/checkpoint.hpp"
#include "claimx/tagger.hpp"
#include "synthetic.hpp"
#include "test_util.hpp"

namespace claimx {
namespace {

TaggerConfig tiny_config(int labels, bool crf) {
  TaggerConfig c;
  c.embedding_dim = 6;
  c.word_hidden = 5;
  c.ff_hidden = 6;
  c.num_labels = labels;
  c.use_crf = crf;
  c.dropout = 0.0;
  c.batch_size = 8;
  c.seed = 3;
  return c;
}

TrainConfig quick_train(int epochs, std::uint64_t seed = 1) {
  TrainConfig t;
  t.lr = 0.02;
  t.max_epochs = epochs;
  t.early_stop_patience = epochs;
  t.seed = seed;
  return t;
}

Abstract abstract_of(std::vector<std::string> sentences) {
  return Abstract{"a", "", std::move(sentences)};
}

TEST(Tagger, LogitShapes) {
  const Vocabulary v = Vocabulary::build({{"a", "b", "c"}}, 1);
  const TaggerModel m(tiny_config(5, true), v, testing::discourse_labels());
  EXPECT_EQ(m.logits(m.encode(abstract_of({"a b"}))).rows(), 1);
  EXPECT_EQ(m.logits(m.encode(abstract_of({"a b"}))).cols(), 5);
  EXPECT_EQ(m.logits(m.encode(abstract_of({"a", "b c", "zzz unseen", ""}))).rows(), 4);
}

TEST(Tagger, OutOfRangeTokenIsContractViolation) {
  const Vocabulary v = Vocabulary::build({{"a"}}, 1);
  const TaggerModel m(tiny_config(2, false), v, claim_label_names());
  EncodedAbstract e{"x", {{0, 99}}, {}};
  EXPECT_THROW(m.logits(e), ContractViolation);
}

TEST(Tagger, AbstractsAreIndependentInABatch) {
  const Vocabulary v = Vocabulary::build({{"a", "b", "c", "d"}}, 1);
  TaggerModel m(tiny_config(2, true), v, claim_label_names());
  const EncodedAbstract x = m.encode(abstract_of({"a b", "c"}), {0, 1});
  const EncodedAbstract y = m.encode(abstract_of({"d d c", "b", "a"}), {1, 0, 0});
  Graph g1, g2;
  const Var x1 = m.forward(g1, x, nullptr), y1 = m.forward(g1, y, nullptr);
  const Var y2 = m.forward(g2, y, nullptr), x2 = m.forward(g2, x, nullptr);
  EXPECT_EQ(x1.value(), x2.value());
  EXPECT_EQ(y1.value(), y2.value());
  EXPECT_EQ(Eigen::MatrixXd(x1.value()), m.logits(x));
}

TEST(Tagger, FiniteDifferenceGradients) {
  const Vocabulary v = Vocabulary::build({{"a", "b", "c"}}, 1);
  for (bool crf : {false, true}) {
    TaggerModel m(tiny_config(3, crf), v, {"x", "y", "z"});
    std::mt19937_64 rng(9);
    for (auto& p : m.params()) p->value = testing::random_tensor(p->value.rows(), p->value.cols(), rng, 0.5);
    const EncodedAbstract e = m.encode(abstract_of({"a b c", "c a"}), {2, 0});
    const auto res = testing::check_gradients(
        m.params(), [&](Graph& g) { return m.loss(g, e, nullptr); }, 1e-5, 12);
    EXPECT_GT(res.checked, 50u);
    EXPECT_LT(res.max_rel_error, 1e-4) << "crf=" << crf;
  }
}

TEST(Tagger, NoCrfTieIsNotClaim) {
  const Vocabulary v = Vocabulary::build({{"a"}}, 1);
  TaggerModel m(tiny_config(2, false), v, claim_label_names());
  m.params().at("head.output.weight").value.setZero();
  m.params().at("head.output.bias").value.setZero();
  const auto p = m.predict(abstract_of({"a", "a a"}));
  ASSERT_EQ(p.size(), 2u);
  for (const auto& s : p) {
    EXPECT_DOUBLE_EQ(s.claim_prob, 0.5);
    EXPECT_FALSE(s.claim);
  }
}

TEST(Tagger, CrfPredictionFollowsViterbiAndNormalizes) {
  const Vocabulary v = Vocabulary::build({{"a", "b", "c"}}, 1);
  TaggerModel m(tiny_config(2, true), v, claim_label_names());
  std::mt19937_64 rng(4);
  for (auto& p : m.params()) p->value = testing::random_tensor(p->value.rows(), p->value.cols(), rng, 1.5);
  for (const auto& sents : std::vector<std::vector<std::string>>{
           {"a"}, {"a b", "c"}, {"c c", "b", "a b c", "a"}}) {
    const EncodedAbstract e = m.encode(abstract_of(sents));
    const auto pred = m.predict(e);
    const auto path = m.decode(e);
    for (std::size_t t = 0; t < pred.size(); ++t) {
      EXPECT_EQ(pred[t].claim, path[t] == 1);
      EXPECT_NEAR(pred[t].distribution[0] + pred[t].distribution[1], 1.0, 1e-9);
      EXPECT_DOUBLE_EQ(pred[t].claim_prob, pred[t].distribution[1]);
    }
  }
}

TEST(Tagger, SaveLoadRoundTrip) {
  const Vocabulary v = Vocabulary::build({{"a", "b", "b"}}, 1);
  TaggerConfig c = tiny_config(2, true);
  c.abstract_lstm = true;
  c.abstract_hidden = 3;
  c.pooling = SentencePooling::kMean;
  const TaggerModel m(c, v, claim_label_names());
  const std::string bytes = m.save();
  const TaggerModel r = TaggerModel::load(bytes);
  EXPECT_EQ(r.params().checksum(), m.params().checksum());
  EXPECT_EQ(r.vocab().tokens(), m.vocab().tokens());
  EXPECT_EQ(r.label_names(), m.label_names());
  EXPECT_EQ(r.config().to_json(), m.config().to_json());
  const EncodedAbstract e = m.encode(abstract_of({"a b", "b"}));
  EXPECT_EQ(r.logits(e), m.logits(e));
  EXPECT_EQ(r.save(), bytes);
}

TEST(Tagger, LoadRejectsArchitectureMismatch) {
  const Vocabulary v = Vocabulary::build({{"a"}}, 1);
  const TaggerModel small(tiny_config(2, true), v, claim_label_names());
  TaggerConfig wide = tiny_config(2, true);
  wide.word_hidden = 7;
  TaggerModel other(wide, v, claim_label_names());
  EXPECT_THROW(other.load_parameters(load_checkpoint(small.save())), CheckpointError);
}

TEST(Tagger, ConclusionsRelabel) {
  DiscourseCorpus c;
  c.label_names = {"OBJECTIVE", "METHODS", "CONCLUSIONS"};
  c.abstracts.push_back({abstract_of({"x", "y", "z"}), {0, 1, 2}});
  const auto claims = conclusions_as_claims(c.abstracts, c.label_names);
  ASSERT_EQ(claims.size(), 1u);
  EXPECT_EQ(claims[0].claims, (std::vector<bool>{false, false, true}));
  EXPECT_THROW(conclusions_as_claims(c.abstracts, {"OBJECTIVE", "METHODS", "RESULTS"}),
               ContractViolation);
}

TEST(Tagger, SentenceLevelSplitsAbstracts) {
  DiscourseCorpus c;
  c.abstracts.push_back({abstract_of({"x", "y"}), {0, 1}});
  const auto s = sentence_level(c.abstracts);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[1].abstract.sentences, (std::vector<std::string>{"y"}));
  EXPECT_EQ(s[1].labels, (std::vector<int>{1}));
}

class SeparableDiscourse : public ::testing::Test {
 protected:
  void SetUp() override {
    train_ = testing::cue_discourse_corpus(40, 1);
    val_ = testing::cue_discourse_corpus(20, 2);
    auto all = testing::abstracts_of(train_);
    vocab_ = build_vocabulary(all, 1);
  }
  TaggerConfig config(bool crf) const {
    TaggerConfig c = tiny_config(5, crf);
    c.embedding_dim = 8;
    c.word_hidden = 8;
    c.ff_hidden = 8;
    return c;
  }
  DiscourseCorpus train_, val_;
  Vocabulary vocab_;
};

TEST_F(SeparableDiscourse, ReachesHighAccuracyAndIsDeterministic) {
  const TrainResult a = pretrain_discourse(train_.abstracts, val_.abstracts, train_.label_names,
                                           vocab_, nullptr, config(false), quick_train(30));
  ASSERT_FALSE(a.log.epochs.empty());
  double best = 0.0;
  for (const auto& e : a.log.epochs) best = std::max(best, e.val_f1);
  EXPECT_GE(best, 0.95);
  EXPECT_EQ(a.log.epochs.front().stage, "pretrain");

  const TrainResult b = pretrain_discourse(train_.abstracts, val_.abstracts, train_.label_names,
                                           vocab_, nullptr, config(false), quick_train(30));
  EXPECT_EQ(a.log.to_jsonl(), b.log.to_jsonl());
  EXPECT_EQ(a.model.params().checksum(), b.model.params().checksum());

  // Training loss ends far below where it started, with few upticks.
  const auto& ep = a.log.epochs;
  EXPECT_LT(ep.back().train_loss, ep.front().train_loss / 10);
  for (std::size_t i = 1; i < ep.size(); ++i) {
    EXPECT_LE(ep[i].train_loss, ep[i - 1].train_loss * 1.10) << "epoch " << ep[i].epoch;
  }
}

TEST_F(SeparableDiscourse, CrfLearnsLabelOrder) {
  const TrainResult r = pretrain_discourse(train_.abstracts, val_.abstracts, train_.label_names,
                                           vocab_, nullptr, config(true), quick_train(15));
  const Tensor& a = r.model.params().at("head.crf.transitions").value;
  const int methods = 2, results = 3, conclusions = 4;
  EXPECT_LT(a(conclusions, methods), a(methods, results));
}

TEST_F(SeparableDiscourse, TransferFreezesThenFineTunes) {
  const TrainResult pre = pretrain_discourse(train_.abstracts, val_.abstracts, train_.label_names,
                                             vocab_, nullptr, config(true), quick_train(3));
  const auto claims = testing::cue_claim_corpus(12, 5);
  TransferPlan plan;
  plan.head_stage = quick_train(2);
  plan.finetune_stage = quick_train(2);

  // Stage one alone: the body must not move.
  TransferPlan head_only = plan;
  head_only.finetune_stage.max_epochs = 0;
  const TrainResult frozen = transfer_claim(pre.model, claims, claims, head_only);
  for (const auto& p : frozen.model.params()) {
    if (p->name.rfind("head.", 0) == 0) continue;
    EXPECT_EQ(p->value, pre.model.params().at(p->name).value) << p->name;
  }
  EXPECT_EQ(frozen.log.stage_boundary_epoch, 2);

  const TrainResult full = transfer_claim(pre.model, claims, claims, plan);
  EXPECT_EQ(full.model.num_labels(), 2);
  EXPECT_EQ(full.log.stage_boundary_epoch, 2);
  ASSERT_EQ(full.log.epochs.size(), 4u);
  EXPECT_EQ(full.log.epochs[2].stage, "finetune");
  EXPECT_EQ(full.log.epochs[2].epoch, 3);
  EXPECT_NE(full.model.params().checksum("word_lstm."), pre.model.params().checksum("word_lstm."));
}

TEST(Tagger, FreezeRespectsBoundaryScoreFlag) {
  const Vocabulary v = Vocabulary::build({{"a"}}, 1);
  TaggerConfig c = tiny_config(2, true);
  c.crf_boundary_scores = false;
  TaggerModel m(c, v, claim_label_names());
  m.freeze_body();
  EXPECT_FALSE(m.params().at("embedding").trainable);
  EXPECT_TRUE(m.params().at("head.crf.transitions").trainable);
  EXPECT_FALSE(m.params().at("head.crf.start").trainable);
  m.unfreeze_all(false);
  EXPECT_FALSE(m.params().at("embedding").trainable);
  EXPECT_TRUE(m.params().at("word_lstm.fwd.W").trainable);
  EXPECT_FALSE(m.params().at("head.crf.end").trainable);
}

TEST(Tagger, ScratchOverfitsMarkerCorpus) {
  const auto corpus = testing::marker_corpus(16, 3);
  const Vocabulary v = build_vocabulary(testing::abstracts_of(corpus), 1);
  TaggerConfig c = tiny_config(2, true);
  c.embedding_dim = 8;
  c.word_hidden = 8;
  c.ff_hidden = 8;
  const TrainResult r = train_scratch(corpus, {}, v, nullptr, c, quick_train(25));
  EXPECT_GE(r.log.epochs.back().val_f1 + 1e-12, 0.95);
}

}  // namespace
}  // namespace claimx

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

#ifndef CLAIMX_TAGGER_HPP_
#define CLAIMX_TAGGER_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "claimx/checkpoint.hpp"
#include "claimx/corpus.hpp"
#include "claimx/crf.hpp"
#include "claimx/nn.hpp"
#include "claimx/text.hpp"
#include "json.hpp"

namespace claimx {

enum class SentencePooling { kFinalStates, kMean };

struct TaggerConfig {
  int embedding_dim = 300;
  int word_hidden = 128;
  SentencePooling pooling = SentencePooling::kFinalStates;
  int ff_hidden = 128;
  int num_labels = 5;
  bool use_crf = true;
  // Feed row-wise log-softmax of the logits to the CRF instead of raw logits.
  bool crf_log_softmax = false;
  // When false, CRF start/end scores stay at zero and are never trained.
  bool crf_boundary_scores = true;
  // Extra Bi-LSTM over sentence vectors before the feedforward layer.
  bool abstract_lstm = false;
  int abstract_hidden = 64;
  bool train_embeddings = true;
  double dropout = 0.25;
  int batch_size = 64;
  std::uint64_t seed = 13;

  nlohmann::json to_json() const;
  static TaggerConfig from_json(const nlohmann::json& j);
};

struct TrainConfig {
  double lr = 1e-3;
  double scheduler_factor = 0.5;
  int scheduler_patience = 2;
  double scheduler_tolerance = 1e-4;
  double min_lr = 1e-6;
  int max_epochs = 30;
  int early_stop_patience = 5;
  double clip_norm = 5.0;
  std::uint64_t seed = 13;
};

/// Stage 1 trains the fresh head with everything else frozen; stage 2
/// unfreezes all parameters and fine-tunes.
struct TransferPlan {
  TrainConfig head_stage;
  TrainConfig finetune_stage;
  bool train_embeddings_in_finetune = true;
  std::optional<bool> use_crf;  // defaults to the pretrained model's setting
};

struct EpochLog {
  int epoch = 0;  // 1-based, counted across stages
  std::string stage;
  double lr = 0.0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_f1 = 0.0;
};

struct TrainingLog {
  std::vector<EpochLog> epochs;
  int stage_boundary_epoch = 0;  // last epoch of stage 1 (transfer only)

  std::string to_jsonl() const;
  // First epoch whose val_f1 >= threshold, or nullopt.
  std::optional<int> first_epoch_reaching(double f1) const;
};

/// Token ids per sentence plus optional gold labels.
struct EncodedAbstract {
  std::string id;
  std::vector<std::vector<int>> sentences;
  std::vector<int> labels;
};

struct SentencePrediction {
  double claim_prob = 0.0;
  bool claim = false;
  std::vector<double> distribution;  // over model labels
};

/// Hierarchical sentence tagger: word embeddings -> word Bi-LSTM -> sentence
/// vector -> feedforward -> per-sentence logits, optionally decoded jointly by
/// a linear-chain CRF across the abstract's sentences.
///
/// Parameter names: "embedding", "word_lstm.{fwd,bwd}.{W,U,b}",
/// "sentence_lstm.*" (optional), "ff.hidden.*", and the replaceable head
/// "head.output.*", "head.crf.{transitions,start,end}".
class TaggerModel {
 public:
  static constexpr std::string_view kHeadPrefix = "head.";

  TaggerModel(TaggerConfig config, Vocabulary vocab, std::vector<std::string> label_names,
              const EmbeddingTable* embeddings = nullptr);
  TaggerModel(TaggerModel&&) = default;
  TaggerModel& operator=(TaggerModel&&) = default;

  const TaggerConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }
  const std::vector<std::string>& label_names() const { return label_names_; }
  int num_labels() const { return config_.num_labels; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }

  EncodedAbstract encode(const Abstract& abstract, std::vector<int> labels = {}) const;

  // T x K emissions on `g`. Parameters enter the graph as trainable nodes.
  // Dropout is active iff `dropout_rng` is non-null.
  Var forward(Graph& g, const EncodedAbstract& abstract, Rng* dropout_rng);
  // Per-abstract loss: sequence NLL with CRF, else summed sentence CE.
  Var loss(Graph& g, const EncodedAbstract& abstract, Rng* dropout_rng);

  // Eval-mode computations; read-only and safe to call concurrently.
  Eigen::MatrixXd logits(const EncodedAbstract& abstract) const;
  double eval_loss(const EncodedAbstract& abstract) const;
  Eigen::MatrixXd probabilities(const EncodedAbstract& abstract) const;
  std::vector<int> decode(const EncodedAbstract& abstract) const;
  std::vector<SentencePrediction> predict(const Abstract& abstract) const;
  std::vector<SentencePrediction> predict(const EncodedAbstract& abstract) const;

  // Freezes every non-head parameter (stage 1 of transfer).
  void freeze_body();
  // Makes everything trainable, except CRF boundary scores when disabled and
  // embeddings when `train_embeddings` is false.
  void unfreeze_all(bool train_embeddings);

  nlohmann::json metadata() const;
  std::string save() const;
  static TaggerModel load(std::string_view bytes);
  void load_parameters(const Checkpoint& ckpt, bool skip_head = false);

 private:
  template <typename Bind, typename Embed>
  Var forward_impl(Graph& g, const EncodedAbstract& abstract, Rng* dropout_rng, Bind bind,
                   Embed embed) const;
  Var loss_from_emissions(Graph& g, Var emissions, const EncodedAbstract& abstract,
                          const CrfVars* crf) const;
  CrfParams<double> crf_params() const;

  TaggerConfig config_;
  Vocabulary vocab_;
  std::vector<std::string> label_names_;
  ParameterSet params_;
  Parameter* embedding_ = nullptr;
  LstmCellParams word_fwd_, word_bwd_;
  LstmCellParams sent_fwd_, sent_bwd_;
  Linear ff_hidden_;
  Linear head_;
  Parameter* crf_transitions_ = nullptr;
  Parameter* crf_start_ = nullptr;
  Parameter* crf_end_ = nullptr;
};

struct TrainResult {
  TaggerModel model;
  TrainingLog log;
};

// Runs epochs of minibatch Adam with gradient clipping, reduce-on-plateau on
// validation loss, and early stopping; restores the best-validation weights.
// Epoch numbers in the appended log start after `log.epochs.back()`.
void fit(TaggerModel& model, const std::vector<EncodedAbstract>& train,
         const std::vector<EncodedAbstract>& val, const TrainConfig& cfg,
         std::string_view stage, TrainingLog& log);

// Vocabulary from tokenized sentences of the given abstracts.
Vocabulary build_vocabulary(const std::vector<Abstract>& abstracts, int min_count);

std::vector<EncodedAbstract> encode_discourse(const TaggerModel& model,
                                              const std::vector<DiscourseAbstract>& abstracts);
std::vector<EncodedAbstract> encode_claims(const TaggerModel& model,
                                           const std::vector<ClaimAbstract>& abstracts);

TrainResult pretrain_discourse(const std::vector<DiscourseAbstract>& train,
                               const std::vector<DiscourseAbstract>& val,
                               const std::vector<std::string>& label_names, Vocabulary vocab,
                               const EmbeddingTable* embeddings, TaggerConfig config,
                               const TrainConfig& train_config);

TrainResult transfer_claim(const TaggerModel& pretrained, const std::vector<ClaimAbstract>& train,
                           const std::vector<ClaimAbstract>& val, const TransferPlan& plan);

TrainResult train_scratch(const std::vector<ClaimAbstract>& train,
                          const std::vector<ClaimAbstract>& val, Vocabulary vocab,
                          const EmbeddingTable* embeddings, TaggerConfig config,
                          const TrainConfig& train_config);

// CONCLUSIONS sentences become claims, everything else not-claim.
std::vector<ClaimAbstract> conclusions_as_claims(const std::vector<DiscourseAbstract>& abstracts,
                                                 const std::vector<std::string>& label_names);

TrainResult train_conclusion_as_claim(const std::vector<DiscourseAbstract>& train,
                                      const std::vector<DiscourseAbstract>& val,
                                      const std::vector<std::string>& label_names,
                                      Vocabulary vocab, const EmbeddingTable* embeddings,
                                      TaggerConfig config, const TrainConfig& train_config);

// Each sentence as its own one-sentence abstract (single-sentence pretraining).
std::vector<DiscourseAbstract> sentence_level(const std::vector<DiscourseAbstract>& abstracts);

inline const std::vector<std::string>& claim_label_names() {
  static const std::vector<std::string> names = {"not_claim", "claim"};
  return names;
}

}  // namespace claimx

#endif  // CLAIMX_TAGGER_HPP_

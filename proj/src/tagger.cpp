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

#include "claimx/tagger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "claimx/eval.hpp"
#include "claimx/hash.hpp"
#include "claimx/optim.hpp"

namespace claimx {

// ---------------------------------------------------------------------------
// Configuration

nlohmann::json TaggerConfig::to_json() const {
  return {{"embedding_dim", embedding_dim},
          {"word_hidden", word_hidden},
          {"pooling", pooling == SentencePooling::kMean ? "mean" : "final"},
          {"ff_hidden", ff_hidden},
          {"num_labels", num_labels},
          {"use_crf", use_crf},
          {"crf_log_softmax", crf_log_softmax},
          {"crf_boundary_scores", crf_boundary_scores},
          {"abstract_lstm", abstract_lstm},
          {"abstract_hidden", abstract_hidden},
          {"train_embeddings", train_embeddings},
          {"dropout", dropout},
          {"batch_size", batch_size},
          {"seed", seed}};
}

TaggerConfig TaggerConfig::from_json(const nlohmann::json& j) {
  TaggerConfig c;
  c.embedding_dim = j.at("embedding_dim").get<int>();
  c.word_hidden = j.at("word_hidden").get<int>();
  c.pooling = j.at("pooling").get<std::string>() == "mean" ? SentencePooling::kMean
                                                           : SentencePooling::kFinalStates;
  c.ff_hidden = j.at("ff_hidden").get<int>();
  c.num_labels = j.at("num_labels").get<int>();
  c.use_crf = j.at("use_crf").get<bool>();
  c.crf_log_softmax = j.value("crf_log_softmax", false);
  c.crf_boundary_scores = j.value("crf_boundary_scores", true);
  c.abstract_lstm = j.value("abstract_lstm", false);
  c.abstract_hidden = j.value("abstract_hidden", 64);
  c.train_embeddings = j.value("train_embeddings", true);
  c.dropout = j.value("dropout", 0.25);
  c.batch_size = j.value("batch_size", 64);
  c.seed = j.value("seed", std::uint64_t{13});
  return c;
}

std::string TrainingLog::to_jsonl() const {
  std::string out;
  for (const auto& e : epochs) {
    nlohmann::ordered_json j;
    j["epoch"] = e.epoch;
    j["stage"] = e.stage;
    j["lr"] = e.lr;
    j["train_loss"] = e.train_loss;
    j["val_loss"] = e.val_loss;
    j["val_f1"] = e.val_f1;
    out += j.dump() + "\n";
  }
  return out;
}

std::optional<int> TrainingLog::first_epoch_reaching(double f1) const {
  for (const auto& e : epochs) {
    if (e.val_f1 >= f1) return e.epoch;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Model

TaggerModel::TaggerModel(TaggerConfig config, Vocabulary vocab,
                         std::vector<std::string> label_names, const EmbeddingTable* embeddings)
    : config_(config), vocab_(std::move(vocab)), label_names_(std::move(label_names)) {
  if (config_.num_labels < 2) throw ContractViolation("tagger needs at least two labels");
  if (static_cast<int>(label_names_.size()) != config_.num_labels) {
    throw ContractViolation("label name count differs from num_labels");
  }
  if (config_.embedding_dim <= 0 || config_.word_hidden <= 0 || config_.ff_hidden <= 0 ||
      (config_.abstract_lstm && config_.abstract_hidden <= 0)) {
    throw ContractViolation("tagger dimensions must be positive");
  }
  if (config_.dropout < 0.0 || config_.dropout >= 1.0) {
    throw ContractViolation("dropout must be in [0, 1)");
  }
  Rng rng(config_.seed);

  Tensor table;
  if (embeddings != nullptr) {
    if (embeddings->dim != config_.embedding_dim ||
        embeddings->matrix.rows() != static_cast<Eigen::Index>(vocab_.size())) {
      throw ContractViolation("embedding table does not match vocabulary/embedding_dim");
    }
    table = embeddings->matrix;
  } else {
    table = random_embeddings(vocab_, config_.embedding_dim, rng()).matrix;
  }
  embedding_ = &params_.add("embedding", std::move(table), config_.train_embeddings);

  const int H = config_.word_hidden;
  word_fwd_ = LstmCellParams::create(params_, "word_lstm.fwd", config_.embedding_dim, H, rng);
  word_bwd_ = LstmCellParams::create(params_, "word_lstm.bwd", config_.embedding_dim, H, rng);
  Eigen::Index sentence_dim = 2 * H;
  if (config_.abstract_lstm) {
    sent_fwd_ = LstmCellParams::create(params_, "sentence_lstm.fwd", sentence_dim,
                                       config_.abstract_hidden, rng);
    sent_bwd_ = LstmCellParams::create(params_, "sentence_lstm.bwd", sentence_dim,
                                       config_.abstract_hidden, rng);
    sentence_dim = 2 * config_.abstract_hidden;
  }
  ff_hidden_ = Linear::create(params_, "ff.hidden", sentence_dim, config_.ff_hidden, rng);
  head_ = Linear::create(params_, "head.output", config_.ff_hidden, config_.num_labels, rng);
  if (config_.use_crf) {
    const int K = config_.num_labels;
    crf_transitions_ = &params_.add("head.crf.transitions", Tensor::Zero(K, K));
    crf_start_ = &params_.add("head.crf.start", Tensor::Zero(K, 1), config_.crf_boundary_scores);
    crf_end_ = &params_.add("head.crf.end", Tensor::Zero(K, 1), config_.crf_boundary_scores);
  }
}

EncodedAbstract TaggerModel::encode(const Abstract& abstract, std::vector<int> labels) const {
  EncodedAbstract e;
  e.id = abstract.id;
  for (const auto& s : abstract.sentences) {
    std::vector<int> ids = vocab_.encode(tokenize(s));
    if (ids.empty()) ids.push_back(Vocabulary::kUnk);
    e.sentences.push_back(std::move(ids));
  }
  e.labels = std::move(labels);
  return e;
}

namespace {

Var dropout(Graph& g, Var x, double rate, Rng* rng) {
  if (rng == nullptr || rate <= 0.0) return x;
  std::bernoulli_distribution keep(1.0 - rate);
  Tensor mask(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    mask.data()[i] = keep(*rng) ? 1.0 / (1.0 - rate) : 0.0;
  }
  return hadamard(x, g.constant(std::move(mask)));
}

Eigen::MatrixXd row_softmax(const Eigen::MatrixXd& z) {
  Eigen::MatrixXd p(z.rows(), z.cols());
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const double m = z.row(r).maxCoeff();
    Eigen::RowVectorXd e = (z.row(r).array() - m).exp().matrix();
    p.row(r) = e / e.sum();
  }
  return p;
}

}  // namespace

template <typename Bind, typename Embed>
Var TaggerModel::forward_impl(Graph& g, const EncodedAbstract& abstract, Rng* dropout_rng,
                              Bind bind, Embed embed) const {
  if (abstract.sentences.empty()) throw ContractViolation("abstract has no sentences");
  const Eigen::Index V = embedding_->value.rows();
  const LstmCellVars wf{bind(*word_fwd_.W), bind(*word_fwd_.U), bind(*word_fwd_.b)};
  const LstmCellVars wb{bind(*word_bwd_.W), bind(*word_bwd_.U), bind(*word_bwd_.b)};

  std::vector<Var> sentence_vectors;
  sentence_vectors.reserve(abstract.sentences.size());
  for (const auto& sentence : abstract.sentences) {
    if (sentence.empty()) throw ContractViolation("sentence with no tokens; map it to UNK upstream");
    std::vector<Var> inputs;
    inputs.reserve(sentence.size());
    for (int id : sentence) {
      if (id < 0 || id >= V) {
        throw ContractViolation("token id " + std::to_string(id) + " outside vocabulary of " +
                                std::to_string(V));
      }
      inputs.push_back(embed(id));
    }
    BiLstmOutput enc = bilstm_encode(g, inputs, wf, wb);
    Var v = config_.pooling == SentencePooling::kMean ? mean(enc.outputs)
                                                      : concat({enc.final_fwd, enc.final_bwd});
    sentence_vectors.push_back(dropout(g, v, config_.dropout, dropout_rng));
  }
  if (config_.abstract_lstm) {
    const LstmCellVars sf{bind(*sent_fwd_.W), bind(*sent_fwd_.U), bind(*sent_fwd_.b)};
    const LstmCellVars sb{bind(*sent_bwd_.W), bind(*sent_bwd_.U), bind(*sent_bwd_.b)};
    sentence_vectors = bilstm_encode(g, sentence_vectors, sf, sb).outputs;
  }
  const Var ff_w = bind(*ff_hidden_.weight), ff_b = bind(*ff_hidden_.bias);
  const Var out_w = bind(*head_.weight), out_b = bind(*head_.bias);
  std::vector<Var> rows;
  rows.reserve(sentence_vectors.size());
  for (const Var& v : sentence_vectors) {
    Var h = tanh(matmul(ff_w, v) + ff_b);
    h = dropout(g, h, config_.dropout, dropout_rng);
    rows.push_back(matmul(out_w, h) + out_b);
  }
  Var emissions = stack_rows(rows);
  if (config_.use_crf && config_.crf_log_softmax) emissions = log_softmax_rows(emissions);
  return emissions;
}

Var TaggerModel::forward(Graph& g, const EncodedAbstract& abstract, Rng* dropout_rng) {
  const Var table = g.param(*embedding_);
  return forward_impl(
      g, abstract, dropout_rng, [&](Parameter& p) { return g.param(p); },
      [&](int id) { return embedding_lookup(table, id); });
}

Var TaggerModel::loss_from_emissions(Graph& g, Var emissions, const EncodedAbstract& abstract,
                                     const CrfVars* crf) const {
  (void)g;
  const auto T = static_cast<std::size_t>(emissions.rows());
  if (abstract.labels.size() != T) {
    throw ContractViolation("abstract " + abstract.id + " has " +
                            std::to_string(abstract.labels.size()) + " labels for " +
                            std::to_string(T) + " sentences");
  }
  for (int y : abstract.labels) {
    if (y < 0 || y >= config_.num_labels) {
      throw ContractViolation("label " + std::to_string(y) + " outside label vocabulary");
    }
  }
  if (crf != nullptr) return crf_nll(emissions, abstract.labels, *crf);
  return cross_entropy_rows(emissions, abstract.labels);
}

Var TaggerModel::loss(Graph& g, const EncodedAbstract& abstract, Rng* dropout_rng) {
  Var emissions = forward(g, abstract, dropout_rng);
  if (config_.use_crf) {
    CrfVars crf{g.param(*crf_transitions_), g.param(*crf_start_), g.param(*crf_end_)};
    return loss_from_emissions(g, emissions, abstract, &crf);
  }
  return loss_from_emissions(g, emissions, abstract, nullptr);
}

// Eval mode: no dropout and only the embedding rows in use enter the graph.
namespace {

template <typename Model, typename Fn>
Var eval_forward(Graph& g, const Parameter& embedding, Fn&& run) {
  return run([&](Parameter& p) { return g.param(p); },
             [&](int id) { return g.constant(embedding.value.row(id).transpose()); });
}

}  // namespace

Eigen::MatrixXd TaggerModel::logits(const EncodedAbstract& abstract) const {
  Graph g;
  Var e = eval_forward<TaggerModel>(g, *embedding_, [&](auto bind, auto embed) {
    return forward_impl(g, abstract, nullptr, bind, embed);
  });
  return e.value();
}

CrfParams<double> TaggerModel::crf_params() const {
  if (!config_.use_crf) throw ContractViolation("model has no CRF layer");
  CrfParams<double> p;
  p.transitions = crf_transitions_->value;
  p.start = crf_start_->value.col(0);
  p.end = crf_end_->value.col(0);
  return p;
}

double TaggerModel::eval_loss(const EncodedAbstract& abstract) const {
  Graph g;
  Var e = eval_forward<TaggerModel>(g, *embedding_, [&](auto bind, auto embed) {
    return forward_impl(g, abstract, nullptr, bind, embed);
  });
  if (config_.use_crf) {
    CrfVars crf{g.param(*crf_transitions_), g.param(*crf_start_), g.param(*crf_end_)};
    return loss_from_emissions(g, e, abstract, &crf).scalar();
  }
  return loss_from_emissions(g, e, abstract, nullptr).scalar();
}

Eigen::MatrixXd TaggerModel::probabilities(const EncodedAbstract& abstract) const {
  const Eigen::MatrixXd z = logits(abstract);
  if (config_.use_crf) return marginals(z, crf_params());
  return row_softmax(z);
}

std::vector<int> TaggerModel::decode(const EncodedAbstract& abstract) const {
  const Eigen::MatrixXd z = logits(abstract);
  if (config_.use_crf) return viterbi_decode(z, crf_params()).labels;
  std::vector<int> out(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index t = 0; t < z.rows(); ++t) {
    Eigen::Index arg = 0;
    z.row(t).maxCoeff(&arg);
    out[static_cast<std::size_t>(t)] = static_cast<int>(arg);
  }
  return out;
}

std::vector<SentencePrediction> TaggerModel::predict(const Abstract& abstract) const {
  return predict(encode(abstract));
}

std::vector<SentencePrediction> TaggerModel::predict(const EncodedAbstract& abstract) const {
  const Eigen::MatrixXd z = logits(abstract);
  Eigen::MatrixXd probs;
  std::vector<int> labels;
  if (config_.use_crf) {
    const CrfParams<double> p = crf_params();
    probs = marginals(z, p);
    labels = viterbi_decode(z, p).labels;
  } else {
    probs = row_softmax(z);
    for (Eigen::Index t = 0; t < z.rows(); ++t) {
      Eigen::Index arg = 0;
      z.row(t).maxCoeff(&arg);
      labels.push_back(static_cast<int>(arg));
    }
  }
  const auto it = std::find(label_names_.begin(), label_names_.end(), "claim");
  const int claim_id = it == label_names_.end() ? -1 : static_cast<int>(it - label_names_.begin());
  std::vector<SentencePrediction> out(labels.size());
  for (std::size_t t = 0; t < labels.size(); ++t) {
    const auto r = static_cast<Eigen::Index>(t);
    out[t].distribution.resize(static_cast<std::size_t>(probs.cols()));
    for (Eigen::Index k = 0; k < probs.cols(); ++k) {
      out[t].distribution[static_cast<std::size_t>(k)] = probs(r, k);
    }
    if (claim_id >= 0) {
      out[t].claim_prob = probs(r, claim_id);
      // CRF booleans follow the Viterbi path; otherwise the probability
      // must strictly exceed one half.
      out[t].claim = config_.use_crf ? labels[t] == claim_id : out[t].claim_prob > 0.5;
    }
  }
  return out;
}

void TaggerModel::freeze_body() {
  params_.set_trainable(false);
  params_.set_trainable(kHeadPrefix, true);
  if (config_.use_crf && !config_.crf_boundary_scores) {
    crf_start_->trainable = false;
    crf_end_->trainable = false;
  }
}

void TaggerModel::unfreeze_all(bool train_embeddings) {
  params_.set_trainable(true);
  embedding_->trainable = train_embeddings;
  if (config_.use_crf && !config_.crf_boundary_scores) {
    crf_start_->trainable = false;
    crf_end_->trainable = false;
  }
}

nlohmann::json TaggerModel::metadata() const {
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [tok, c] : vocab_.counts()) counts[tok] = c;
  return {{"format", "claimx-tagger"},
          {"config", config_.to_json()},
          {"labels", label_names_},
          {"vocabulary", vocab_.tokens()},
          {"token_counts", counts}};
}

std::string TaggerModel::save() const { return save_checkpoint(params_, metadata()); }

TaggerModel TaggerModel::load(std::string_view bytes) {
  const Checkpoint ckpt = load_checkpoint(bytes);
  const nlohmann::json& meta = ckpt.metadata;
  if (meta.value("format", "") != "claimx-tagger") {
    throw CheckpointError("checkpoint does not hold a tagger model");
  }
  std::unordered_map<std::string, std::int64_t> counts;
  if (meta.contains("token_counts")) {
    counts = meta.at("token_counts").get<std::unordered_map<std::string, std::int64_t>>();
  }
  Vocabulary vocab = Vocabulary::from_tokens(
      meta.at("vocabulary").get<std::vector<std::string>>(), std::move(counts));
  TaggerConfig config = TaggerConfig::from_json(meta.at("config"));
  EmbeddingTable placeholder{config.embedding_dim,
                             Tensor::Zero(static_cast<Eigen::Index>(vocab.size()),
                                          config.embedding_dim),
                             0.0};
  TaggerModel model(config, std::move(vocab), meta.at("labels").get<std::vector<std::string>>(),
                    &placeholder);
  model.load_parameters(ckpt);
  return model;
}

void TaggerModel::load_parameters(const Checkpoint& ckpt, bool skip_head) {
  if (!skip_head) {
    restore_parameters(params_, ckpt);
    return;
  }
  // Body only: the head of the checkpoint and of this model may differ.
  for (const auto& nt : ckpt.tensors) {
    if (nt.name.rfind(kHeadPrefix, 0) == 0) continue;
    Parameter* p = params_.find(nt.name);
    if (p == nullptr) throw CheckpointError("checkpoint tensor '" + nt.name + "' has no parameter");
    if (p->value.rows() != nt.value.rows() || p->value.cols() != nt.value.cols()) {
      throw CheckpointError("shape mismatch for tensor '" + nt.name + "'");
    }
    p->value = nt.value;
  }
  for (const auto& p : params_) {
    if (p->name.rfind(kHeadPrefix, 0) != 0 && ckpt.find(p->name) == nullptr) {
      throw CheckpointError("checkpoint lacks tensor '" + p->name + "'");
    }
  }
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct Validation {
  double loss = 0.0;
  double f1 = 0.0;
};

// Binary models score F1 of label 1; wider label sets score micro-F1, which
// equals accuracy when every sentence gets exactly one label.
Validation validate(const TaggerModel& model, const std::vector<EncodedAbstract>& data) {
  Validation v;
  BinaryCounts counts;
  std::size_t correct = 0, total = 0;
  for (const auto& a : data) {
    v.loss += model.eval_loss(a);
    const std::vector<int> pred = model.decode(a);
    for (std::size_t t = 0; t < pred.size(); ++t) {
      correct += pred[t] == a.labels[t] ? 1 : 0;
      ++total;
      const bool p = pred[t] == 1, y = a.labels[t] == 1;
      if (p && y) ++counts.tp;
      if (p && !y) ++counts.fp;
      if (!p && y) ++counts.fn;
      if (!p && !y) ++counts.tn;
    }
  }
  if (!data.empty()) v.loss /= static_cast<double>(data.size());
  if (model.num_labels() == 2) {
    v.f1 = prf1(counts).f1;
  } else {
    v.f1 = total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
  }
  return v;
}

std::vector<Tensor> snapshot(const ParameterSet& params) {
  std::vector<Tensor> out;
  for (const auto& p : params) out.push_back(p->value);
  return out;
}

void restore(ParameterSet& params, const std::vector<Tensor>& values) {
  std::size_t i = 0;
  for (auto& p : params) p->value = values[i++];
}

}  // namespace

void fit(TaggerModel& model, const std::vector<EncodedAbstract>& train,
         const std::vector<EncodedAbstract>& val, const TrainConfig& cfg, std::string_view stage,
         TrainingLog& log) {
  if (train.empty()) throw ContractViolation("fit: empty training set");
  if (cfg.max_epochs < 0 || cfg.lr <= 0.0) throw ContractViolation("fit: bad train config");
  ParameterSet& params = model.params();
  Rng rng(cfg.seed);
  AdamState adam;
  PlateauScheduler scheduler;
  scheduler.current_lr = cfg.lr;
  scheduler.factor = cfg.scheduler_factor;
  scheduler.patience = cfg.scheduler_patience;
  scheduler.tolerance = cfg.scheduler_tolerance;
  scheduler.min_lr = cfg.min_lr;

  const std::vector<EncodedAbstract>& monitor = val.empty() ? train : val;
  const std::size_t batch = static_cast<std::size_t>(std::max(1, model.config().batch_size));
  const int first_epoch = log.epochs.empty() ? 1 : log.epochs.back().epoch + 1;

  double best_loss = std::numeric_limits<double>::infinity();
  std::vector<Tensor> best = snapshot(params);
  int since_best = 0;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = scheduler.current_lr;
    double train_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      params.zero_grad();
      Graph g;
      std::vector<Var> losses;
      for (std::size_t i = start; i < stop; ++i) {
        losses.push_back(model.loss(g, train[order[i]], &rng));
      }
      Var total = losses.front();
      for (std::size_t i = 1; i < losses.size(); ++i) total = total + losses[i];
      Var batch_loss = scale(total, 1.0 / static_cast<double>(losses.size()));
      train_loss += total.scalar();
      g.backward(batch_loss);
      clip_grad_norm(params, cfg.clip_norm);
      adam_step(params, adam, lr);
    }
    train_loss /= static_cast<double>(train.size());

    const Validation v = validate(model, monitor);
    log.epochs.push_back({first_epoch + epoch, std::string(stage), lr, train_loss, v.loss, v.f1});
    scheduler.observe(v.loss);
    if (v.loss < best_loss) {
      best_loss = v.loss;
      best = snapshot(params);
      since_best = 0;
    } else if (++since_best >= cfg.early_stop_patience) {
      break;
    }
  }
  restore(params, best);
}

Vocabulary build_vocabulary(const std::vector<Abstract>& abstracts, int min_count) {
  std::vector<std::vector<std::string>> seqs;
  for (const auto& a : abstracts) {
    for (const auto& s : a.sentences) seqs.push_back(tokenize(s));
  }
  return Vocabulary::build(seqs, min_count);
}

std::vector<EncodedAbstract> encode_discourse(const TaggerModel& model,
                                              const std::vector<DiscourseAbstract>& abstracts) {
  std::vector<EncodedAbstract> out;
  out.reserve(abstracts.size());
  for (const auto& a : abstracts) out.push_back(model.encode(a.abstract, a.labels));
  return out;
}

std::vector<EncodedAbstract> encode_claims(const TaggerModel& model,
                                           const std::vector<ClaimAbstract>& abstracts) {
  std::vector<EncodedAbstract> out;
  out.reserve(abstracts.size());
  for (const auto& a : abstracts) {
    std::vector<int> labels(a.claims.begin(), a.claims.end());
    out.push_back(model.encode(a.abstract, std::move(labels)));
  }
  return out;
}

TrainResult pretrain_discourse(const std::vector<DiscourseAbstract>& train,
                               const std::vector<DiscourseAbstract>& val,
                               const std::vector<std::string>& label_names, Vocabulary vocab,
                               const EmbeddingTable* embeddings, TaggerConfig config,
                               const TrainConfig& train_config) {
  config.num_labels = static_cast<int>(label_names.size());
  TrainResult r{TaggerModel(config, std::move(vocab), label_names, embeddings), {}};
  fit(r.model, encode_discourse(r.model, train), encode_discourse(r.model, val), train_config,
      "pretrain", r.log);
  return r;
}

TrainResult transfer_claim(const TaggerModel& pretrained, const std::vector<ClaimAbstract>& train,
                           const std::vector<ClaimAbstract>& val, const TransferPlan& plan) {
  TaggerConfig config = pretrained.config();
  config.num_labels = 2;
  config.use_crf = plan.use_crf.value_or(config.use_crf);
  config.train_embeddings = plan.train_embeddings_in_finetune;
  EmbeddingTable table{config.embedding_dim,
                       pretrained.params().at("embedding").value, 0.0};
  TrainResult r{TaggerModel(config, pretrained.vocab(), claim_label_names(), &table), {}};
  r.model.load_parameters(load_checkpoint(pretrained.save()), /*skip_head=*/true);

  const std::vector<EncodedAbstract> tr = encode_claims(r.model, train);
  const std::vector<EncodedAbstract> va = encode_claims(r.model, val);
  r.model.freeze_body();
  fit(r.model, tr, va, plan.head_stage, "head", r.log);
  r.log.stage_boundary_epoch = r.log.epochs.empty() ? 0 : r.log.epochs.back().epoch;
  r.model.unfreeze_all(plan.train_embeddings_in_finetune);
  fit(r.model, tr, va, plan.finetune_stage, "finetune", r.log);
  return r;
}

TrainResult train_scratch(const std::vector<ClaimAbstract>& train,
                          const std::vector<ClaimAbstract>& val, Vocabulary vocab,
                          const EmbeddingTable* embeddings, TaggerConfig config,
                          const TrainConfig& train_config) {
  config.num_labels = 2;
  TrainResult r{TaggerModel(config, std::move(vocab), claim_label_names(), embeddings), {}};
  fit(r.model, encode_claims(r.model, train), encode_claims(r.model, val), train_config,
      "scratch", r.log);
  return r;
}

std::vector<ClaimAbstract> conclusions_as_claims(const std::vector<DiscourseAbstract>& abstracts,
                                                 const std::vector<std::string>& label_names) {
  std::vector<bool> is_conclusion(label_names.size(), false);
  bool any = false;
  for (std::size_t i = 0; i < label_names.size(); ++i) {
    std::string up = label_names[i];
    std::transform(up.begin(), up.end(), up.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (up == "CONCLUSIONS" || up == "CONCLUSION") is_conclusion[i] = any = true;
  }
  if (!any) throw ContractViolation("label set has no CONCLUSIONS label");
  std::vector<ClaimAbstract> out;
  out.reserve(abstracts.size());
  for (const auto& a : abstracts) {
    ClaimAbstract c{a.abstract, {}};
    for (int y : a.labels) c.claims.push_back(is_conclusion.at(static_cast<std::size_t>(y)));
    out.push_back(std::move(c));
  }
  return out;
}

TrainResult train_conclusion_as_claim(const std::vector<DiscourseAbstract>& train,
                                      const std::vector<DiscourseAbstract>& val,
                                      const std::vector<std::string>& label_names,
                                      Vocabulary vocab, const EmbeddingTable* embeddings,
                                      TaggerConfig config, const TrainConfig& train_config) {
  return train_scratch(conclusions_as_claims(train, label_names),
                       conclusions_as_claims(val, label_names), std::move(vocab), embeddings,
                       config, train_config);
}

std::vector<DiscourseAbstract> sentence_level(const std::vector<DiscourseAbstract>& abstracts) {
  std::vector<DiscourseAbstract> out;
  for (const auto& a : abstracts) {
    for (std::size_t i = 0; i < a.abstract.sentences.size(); ++i) {
      DiscourseAbstract s;
      s.abstract.id = a.abstract.id + "#" + std::to_string(i);
      s.abstract.title = a.abstract.title;
      s.abstract.sentences = {a.abstract.sentences[i]};
      s.labels = {a.labels.at(i)};
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace claimx

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

#include "claimx/cli.hpp"

#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "claimx/baselines.hpp"
#include "claimx/checkpoint.hpp"
#include "claimx/corpus.hpp"
#include "claimx/eval.hpp"
#include "claimx/hash.hpp"
#include "claimx/service.hpp"
#include "claimx/tagger.hpp"
#include "json.hpp"

namespace claimx {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Options shared by the training subcommands.
struct ModelOptions {
  TaggerConfig tagger;
  TrainConfig train;
  std::string pooling = "final";
  std::string embeddings;
  int min_count = 1;
  bool no_crf = false;
  bool no_crf_boundary = false;
  bool freeze_embeddings = false;
};

struct Context {
  Context(std::ostream& o, std::ostream& e, std::string cmd)
      : out(o), err(e), command(std::move(cmd)) {}

  std::ostream& out;
  std::ostream& err;
  std::string command;
  std::string out_dir = ".";
  std::uint64_t seed = 13;
  ordered_json config = ordered_json::object();
  ordered_json inputs = ordered_json::object();
  std::vector<std::string> outputs;
  std::string last_input;  // names the file in parse errors

  void log(const std::string& msg) const { err << "[claimx " << command << "] " << msg << "\n"; }

  // Reads an input file and records its hash in the manifest.
  std::string input(const std::string& path) {
    std::string bytes = read_file(path);
    last_input = path;
    inputs[path] = hex64(fnv1a(bytes));
    return bytes;
  }
  void hash_input(const std::string& path) { inputs[path] = hex64(fnv1a(read_file(path))); }

  std::string output_path(const std::string& name) const { return (fs::path(out_dir) / name).string(); }
  void write_output(const std::string& name, std::string_view bytes) {
    write_file(output_path(name), bytes);
    outputs.push_back(name);
  }

  void write_manifest() {
    ordered_json m;
    m["command"] = command;
    m["seed"] = seed;
    m["config"] = config;
    m["inputs"] = inputs;
    m["outputs"] = outputs;
    write_file(output_path("manifest.json"), m.dump(2) + "\n");
  }
};

void add_model_options(CLI::App* app, ModelOptions& o) {
  app->add_option("--embeddings", o.embeddings, "Word vectors in GloVe text format")
      ->check(CLI::ExistingFile);
  app->add_option("--min-count", o.min_count, "Minimum token count for the vocabulary")
      ->capture_default_str();
  app->add_option("--embedding-dim", o.tagger.embedding_dim,
                  "Embedding size when no vector file is given")
      ->capture_default_str();
  app->add_option("--word-hidden", o.tagger.word_hidden, "Word Bi-LSTM hidden size per direction")
      ->capture_default_str();
  app->add_option("--ff-hidden", o.tagger.ff_hidden, "Feedforward hidden size")
      ->capture_default_str();
  app->add_option("--pooling", o.pooling, "Sentence vector: final | mean")
      ->check(CLI::IsMember({"final", "mean"}))
      ->capture_default_str();
  app->add_flag("--abstract-lstm", o.tagger.abstract_lstm,
                "Add a Bi-LSTM over sentence vectors");
  app->add_option("--abstract-hidden", o.tagger.abstract_hidden, "Abstract Bi-LSTM hidden size")
      ->capture_default_str();
  app->add_option("--dropout", o.tagger.dropout, "Dropout rate")->capture_default_str();
  app->add_option("--batch-size", o.tagger.batch_size, "Abstracts per batch")
      ->capture_default_str();
  app->add_flag("--no-crf", o.no_crf, "Independent per-sentence softmax instead of a CRF");
  app->add_flag("--crf-log-softmax", o.tagger.crf_log_softmax,
                "Feed row-wise log-softmax of the logits to the CRF");
  app->add_flag("--no-crf-boundary", o.no_crf_boundary, "Fix CRF start/end scores at zero");
  app->add_flag("--freeze-embeddings", o.freeze_embeddings, "Never update word embeddings");
  app->add_option("--epochs", o.train.max_epochs, "Maximum epochs")->capture_default_str();
  app->add_option("--lr", o.train.lr, "Initial Adam learning rate")->capture_default_str();
  app->add_option("--early-stop", o.train.early_stop_patience,
                  "Epochs without validation improvement before stopping")
      ->capture_default_str();
  app->add_option("--clip-norm", o.train.clip_norm, "Global gradient norm limit")
      ->capture_default_str();
}

// Final model/train configs with the seed and flags folded in.
void finalize(ModelOptions& o, std::uint64_t seed) {
  o.tagger.pooling = o.pooling == "mean" ? SentencePooling::kMean : SentencePooling::kFinalStates;
  o.tagger.use_crf = !o.no_crf;
  o.tagger.crf_boundary_scores = !o.no_crf_boundary;
  o.tagger.train_embeddings = !o.freeze_embeddings;
  o.tagger.seed = seed;
  o.train.seed = seed;
}

ordered_json train_config_json(const TrainConfig& t) {
  ordered_json j;
  j["lr"] = t.lr;
  j["scheduler_factor"] = t.scheduler_factor;
  j["scheduler_patience"] = t.scheduler_patience;
  j["min_lr"] = t.min_lr;
  j["max_epochs"] = t.max_epochs;
  j["early_stop_patience"] = t.early_stop_patience;
  j["clip_norm"] = t.clip_norm;
  return j;
}

std::optional<EmbeddingTable> maybe_embeddings(Context& ctx, const ModelOptions& o,
                                               const Vocabulary& vocab, TaggerConfig& config) {
  if (o.embeddings.empty()) return std::nullopt;
  ctx.hash_input(o.embeddings);
  EmbeddingTable t = load_embeddings(o.embeddings, vocab, ctx.seed);
  config.embedding_dim = t.dim;
  std::ostringstream msg;
  msg << "loaded " << t.dim << "-d vectors, vocabulary coverage " << t.coverage;
  ctx.log(msg.str());
  return t;
}

std::vector<ClaimRecord> load_claim_records(Context& ctx, const std::string& path) {
  return parse_claim_text(ctx.input(path));
}

Splits<ClaimAbstract> claim_splits(const std::vector<ClaimRecord>& records, std::uint64_t seed) {
  return make_splits(to_claim_abstracts(records), SplitSpec{seed, 0.5, 0.25});
}

std::vector<Abstract> abstracts_of(const std::vector<ClaimAbstract>& v) {
  std::vector<Abstract> out;
  for (const auto& a : v) out.push_back(a.abstract);
  return out;
}

std::vector<Abstract> abstracts_of(const std::vector<DiscourseAbstract>& v) {
  std::vector<Abstract> out;
  for (const auto& a : v) out.push_back(a.abstract);
  return out;
}

// Re-indexes `corpus` labels into `names`, which must contain every label.
std::vector<DiscourseAbstract> remap_labels(const DiscourseCorpus& corpus,
                                            const std::vector<std::string>& names) {
  std::vector<DiscourseAbstract> out = corpus.abstracts;
  for (auto& a : out) {
    for (int& y : a.labels) {
      const std::string& name = corpus.label_names.at(static_cast<std::size_t>(y));
      auto it = std::find(names.begin(), names.end(), name);
      if (it == names.end()) {
        throw std::runtime_error("validation label '" + name + "' is absent from training data");
      }
      y = static_cast<int>(it - names.begin());
    }
  }
  return out;
}

void log_training(Context& ctx, const TrainingLog& log) {
  ctx.write_output("training_log.jsonl", log.to_jsonl());
  if (!log.epochs.empty()) {
    const EpochLog& e = log.epochs.back();
    std::ostringstream msg;
    msg << log.epochs.size() << " epochs; last val_loss " << e.val_loss << " val_f1 " << e.val_f1;
    ctx.log(msg.str());
  }
}

// ---------------------------------------------------------------------------

struct PretrainArgs {
  std::string corpus;
  std::string val_corpus;
  bool sentence_level = false;
  ModelOptions model;
};

int cmd_pretrain(Context& ctx, PretrainArgs& a) {
  finalize(a.model, ctx.seed);
  const DiscourseCorpus corpus = parse_discourse_text(ctx.input(a.corpus));
  if (corpus.abstracts.empty()) throw std::runtime_error("discourse corpus has no abstracts");
  std::vector<DiscourseAbstract> train, val;
  if (!a.val_corpus.empty()) {
    train = corpus.abstracts;
    val = remap_labels(parse_discourse_text(ctx.input(a.val_corpus)), corpus.label_names);
  } else {
    Splits<DiscourseAbstract> s = make_splits(corpus.abstracts, SplitSpec{ctx.seed, 0.9, 0.1});
    train = std::move(s.train);
    val = std::move(s.val);
    val.insert(val.end(), s.test.begin(), s.test.end());
  }
  if (a.sentence_level) {
    train = sentence_level(train);
    val = sentence_level(val);
    a.model.tagger.use_crf = false;
  }
  ctx.log(std::to_string(train.size()) + " train / " + std::to_string(val.size()) +
          " validation abstracts, labels: " + std::to_string(corpus.label_names.size()));
  Vocabulary vocab = build_vocabulary(abstracts_of(train), a.model.min_count);
  auto table = maybe_embeddings(ctx, a.model, vocab, a.model.tagger);
  ctx.config["tagger"] = a.model.tagger.to_json();
  ctx.config["train"] = train_config_json(a.model.train);
  ctx.config["sentence_level"] = a.sentence_level;

  TrainResult r = pretrain_discourse(train, val, corpus.label_names, std::move(vocab),
                                     table ? &*table : nullptr, a.model.tagger, a.model.train);
  ctx.write_output("pretrained.ckpt", r.model.save());
  log_training(ctx, r.log);
  return kExitOk;
}

struct TransferArgs {
  std::string pretrained;
  std::string corpus;
  int head_epochs = 5;
  ModelOptions model;
};

int cmd_transfer(Context& ctx, TransferArgs& a) {
  finalize(a.model, ctx.seed);
  const TaggerModel pretrained = TaggerModel::load(ctx.input(a.pretrained));
  const Splits<ClaimAbstract> s = claim_splits(load_claim_records(ctx, a.corpus), ctx.seed);
  if (s.train.empty()) throw std::runtime_error("claim corpus has no training abstracts");

  TransferPlan plan;
  plan.head_stage = a.model.train;
  plan.head_stage.max_epochs = a.head_epochs;
  plan.finetune_stage = a.model.train;
  plan.train_embeddings_in_finetune = !a.model.freeze_embeddings;
  if (a.model.no_crf) plan.use_crf = false;
  ctx.config["head_stage"] = train_config_json(plan.head_stage);
  ctx.config["finetune_stage"] = train_config_json(plan.finetune_stage);
  ctx.config["use_crf"] = plan.use_crf.value_or(pretrained.config().use_crf);
  ctx.config["train_embeddings_in_finetune"] = plan.train_embeddings_in_finetune;
  ctx.log(std::to_string(s.train.size()) + " train / " + std::to_string(s.val.size()) +
          " validation abstracts");

  TrainResult r = transfer_claim(pretrained, s.train, s.val, plan);
  ctx.write_output("claim.ckpt", r.model.save());
  log_training(ctx, r.log);
  return kExitOk;
}

struct TrainArgs {
  std::string corpus;
  bool conclusion_as_claim = false;
  ModelOptions model;
};

int cmd_train(Context& ctx, TrainArgs& a) {
  finalize(a.model, ctx.seed);
  ctx.config["conclusion_as_claim"] = a.conclusion_as_claim;
  TrainResult r = [&] {
    if (a.conclusion_as_claim) {
      const DiscourseCorpus corpus = parse_discourse_text(ctx.input(a.corpus));
      Splits<DiscourseAbstract> s =
          make_splits(corpus.abstracts, SplitSpec{ctx.seed, 0.9, 0.1});
      s.val.insert(s.val.end(), s.test.begin(), s.test.end());
      if (s.train.empty()) throw std::runtime_error("discourse corpus has no abstracts");
      Vocabulary vocab = build_vocabulary(abstracts_of(s.train), a.model.min_count);
      auto table = maybe_embeddings(ctx, a.model, vocab, a.model.tagger);
      ctx.config["tagger"] = a.model.tagger.to_json();
      ctx.config["train"] = train_config_json(a.model.train);
      return train_conclusion_as_claim(s.train, s.val, corpus.label_names, std::move(vocab),
                                       table ? &*table : nullptr, a.model.tagger, a.model.train);
    }
    const Splits<ClaimAbstract> s = claim_splits(load_claim_records(ctx, a.corpus), ctx.seed);
    if (s.train.empty()) throw std::runtime_error("claim corpus has no training abstracts");
    Vocabulary vocab = build_vocabulary(abstracts_of(s.train), a.model.min_count);
    auto table = maybe_embeddings(ctx, a.model, vocab, a.model.tagger);
    ctx.config["tagger"] = a.model.tagger.to_json();
    ctx.config["train"] = train_config_json(a.model.train);
    return train_scratch(s.train, s.val, std::move(vocab), table ? &*table : nullptr,
                         a.model.tagger, a.model.train);
  }();
  ctx.write_output("claim.ckpt", r.model.save());
  log_training(ctx, r.log);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::vector<std::string> models;
  std::string corpus;
  std::string split = "test";
  std::string checkpoint;
  std::string discourse_checkpoint;
  std::string rules;
  std::string embeddings;
  std::string freq_file;
  int sif_dim = 50;
  double sif_a = 1e-3;
};

int cmd_eval(Context& ctx, EvalArgs& a) {
  const std::string corpus_bytes = ctx.input(a.corpus);
  const Splits<ClaimAbstract> s = claim_splits(parse_claim_text(corpus_bytes), ctx.seed);
  std::vector<std::pair<std::string, const std::vector<ClaimAbstract>*>> splits;
  if (a.split == "train" || a.split == "all") splits.push_back({"train", &s.train});
  if (a.split == "validation" || a.split == "all") splits.push_back({"validation", &s.val});
  if (a.split == "test" || a.split == "all") splits.push_back({"test", &s.test});

  ctx.config["models"] = a.models;
  ctx.config["split"] = a.split;

  std::optional<RuleSet> rules;
  std::unique_ptr<TaggerModel> tagger, discourse;
  std::unique_ptr<DiscourseScorer> scorer;
  std::optional<SifClaimClassifier> sif, sif_discourse;

  auto sif_inputs = [&]() {
    Vocabulary vocab = build_vocabulary(abstracts_of(s.train), 1);
    WordFrequencies freq = a.freq_file.empty()
                               ? WordFrequencies::from_vocabulary(vocab)
                               : (ctx.hash_input(a.freq_file), WordFrequencies::load(a.freq_file));
    Eigen::MatrixXd table;
    if (!a.embeddings.empty()) {
      ctx.hash_input(a.embeddings);
      table = load_embeddings(a.embeddings, vocab, ctx.seed).matrix;
    } else {
      table = random_embeddings(vocab, a.sif_dim, ctx.seed).matrix;
    }
    ctx.config["sif"] = {{"a", a.sif_a}, {"dim", table.cols()}};
    return std::make_tuple(std::move(vocab), std::move(freq), std::move(table));
  };
  SifClassifierConfig sif_cfg;
  sif_cfg.sif.a = a.sif_a;

  std::vector<std::pair<std::string, ClaimPredictor>> predictors;
  for (const auto& name : a.models) {
    if (name == "last-sentence") {
      predictors.push_back({name, last_sentence_baseline});
    } else if (name == "rule-based") {
      const std::string path = a.rules.empty() ? RuleSet::default_rules_path() : a.rules;
      rules = RuleSet::parse(ctx.input(path));
      predictors.push_back({name, [&](const Abstract& x) { return rule_based_extract(x, *rules); }});
    } else if (name == "tagger") {
      if (a.checkpoint.empty()) throw CLI::ValidationError("--model tagger needs --checkpoint");
      tagger = std::make_unique<TaggerModel>(TaggerModel::load(ctx.input(a.checkpoint)));
      ctx.config["tagger"] = tagger->config().to_json();
      predictors.push_back({name, [&](const Abstract& x) {
                              std::vector<bool> out;
                              for (const auto& p : tagger->predict(x)) out.push_back(p.claim);
                              return out;
                            }});
    } else if (name == "sif") {
      auto [vocab, freq, table] = sif_inputs();
      sif = SifClaimClassifier::train(s.train, std::move(vocab), std::move(freq), std::move(table),
                                      nullptr, sif_cfg);
      predictors.push_back({name, [&](const Abstract& x) { return sif->predict(x); }});
    } else if (name == "sif-discourse") {
      if (a.discourse_checkpoint.empty()) {
        throw CLI::ValidationError("--model sif-discourse needs --discourse-checkpoint");
      }
      discourse =
          std::make_unique<TaggerModel>(TaggerModel::load(ctx.input(a.discourse_checkpoint)));
      scorer = std::make_unique<TaggerDiscourseScorer>(*discourse);
      auto [vocab, freq, table] = sif_inputs();
      sif_discourse = SifClaimClassifier::train(s.train, std::move(vocab), std::move(freq),
                                                std::move(table), scorer.get(), sif_cfg);
      predictors.push_back({name, [&](const Abstract& x) { return sif_discourse->predict(x); }});
    }
  }

  std::vector<ReportRow> rows;
  ordered_json errors = ordered_json::array();
  for (const auto& [name, predictor] : predictors) {
    for (const auto& [split_name, data] : splits) {
      const Evaluation e = evaluate_model(predictor, *data);
      rows.push_back({name, split_name, e.metrics.precision, e.metrics.recall, e.metrics.f1});
      ordered_json j;
      j["model"] = name;
      j["split"] = split_name;
      j["exact_match_fraction"] = e.exact_match_fraction;
      j["single_error_abstracts"] = e.single_error_abstracts;
      j["multi_error_abstracts"] = ordered_json::array();
      for (const auto& err : e.errors) {
        j["multi_error_abstracts"].push_back(
            {{"id", err.id}, {"misclassified", err.misclassified}, {"sentences", err.sentences}});
      }
      errors.push_back(std::move(j));
    }
  }
  const ComparisonReport report = build_comparison(std::move(rows), ctx.seed,
                                                   hex64(fnv1a(corpus_bytes)),
                                                   hex64(fnv1a(ctx.config.dump())));
  const std::string table = render_table(report);
  ctx.write_output("report.txt", table);
  ctx.write_output("report.jsonl", render_jsonl(report));
  std::string error_lines;
  for (const auto& j : errors) error_lines += j.dump() + "\n";
  ctx.write_output("errors.jsonl", error_lines);
  ctx.out << table;
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct PredictArgs {
  std::string checkpoint;
  std::string discourse_checkpoint;
  std::string text_file;
};

// Blank-line separated paragraphs are separate abstracts.
std::vector<std::string> paragraphs(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line, current;
  auto flush = [&] {
    if (current.find_first_not_of(" \t\r\n") != std::string::npos) out.push_back(current);
    current.clear();
  };
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      flush();
    } else {
      if (!current.empty()) current += ' ';
      current += line;
    }
  }
  flush();
  return out;
}

int cmd_predict(Context& ctx, PredictArgs& a) {
  const TaggerModel model = TaggerModel::load(ctx.input(a.checkpoint));
  std::unique_ptr<TaggerModel> discourse;
  if (!a.discourse_checkpoint.empty()) {
    discourse = std::make_unique<TaggerModel>(TaggerModel::load(ctx.input(a.discourse_checkpoint)));
  }
  const bool has_claim = std::find(model.label_names().begin(), model.label_names().end(),
                                   "claim") != model.label_names().end();
  const TaggerModel* dist_model = discourse ? discourse.get() : (has_claim ? nullptr : &model);

  const std::vector<std::string> texts = paragraphs(ctx.input(a.text_file));
  std::string lines;
  for (std::size_t n = 0; n < texts.size(); ++n) {
    Abstract abstract;
    abstract.id = std::to_string(n + 1);
    for (auto& span : split_sentences(texts[n])) abstract.sentences.push_back(std::move(span.text));
    if (abstract.sentences.empty()) continue;
    const std::vector<SentencePrediction> preds = model.predict(abstract);
    Eigen::MatrixXd dist;
    if (dist_model != nullptr) dist = dist_model->probabilities(dist_model->encode(abstract));
    for (std::size_t i = 0; i < preds.size(); ++i) {
      ordered_json j;
      j["abstract_id"] = abstract.id;
      j["index"] = i;
      j["text"] = abstract.sentences[i];
      j["claim_prob"] = preds[i].claim_prob;
      j["claim"] = preds[i].claim;
      ordered_json d = ordered_json::object();
      if (dist_model != nullptr) {
        for (std::size_t k = 0; k < dist_model->label_names().size(); ++k) {
          d[dist_model->label_names()[k]] =
              dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
        }
      }
      j["discourse_dist"] = d;
      lines += j.dump() + "\n";
    }
  }
  ctx.write_output("predictions.jsonl", lines);
  ctx.out << lines;
  return kExitOk;
}

struct ServeArgs {
  std::string checkpoint;
  std::string discourse_checkpoint;
  std::string tasks;
  std::string store;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t max_body = 1 << 20;
};

int cmd_serve(Context& ctx, ServeArgs& a) {
  std::unique_ptr<TaggerModel> claim, discourse;
  std::unique_ptr<AnnotationStore> store;
  if (!a.checkpoint.empty()) {
    claim = std::make_unique<TaggerModel>(TaggerModel::load(ctx.input(a.checkpoint)));
  }
  if (!a.discourse_checkpoint.empty()) {
    discourse = std::make_unique<TaggerModel>(TaggerModel::load(ctx.input(a.discourse_checkpoint)));
  }
  if (!a.tasks.empty()) {
    store = std::make_unique<AnnotationStore>(parse_tasks(ctx.input(a.tasks)), a.store);
  }
  ctx.config["host"] = a.host;
  ctx.config["port"] = a.port;
  ctx.config["store"] = a.store;
  ctx.config["max_body"] = a.max_body;
  ctx.write_manifest();
  Service service(claim.get(), discourse.get(), store.get(), a.max_body);
  HttpServer server(service);
  ctx.log("listening on " + a.host + ":" + std::to_string(a.port));
  server.run(a.host, a.port);
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_stats(Context& ctx, const std::string& corpus) {
  const CorpusStats st = corpus_stats(to_claim_abstracts(load_claim_records(ctx, corpus)));
  std::ostringstream o;
  o << "abstracts: " << st.abstracts << "\n"
    << "sentences: " << st.sentences << "\n"
    << "claims: " << st.claims << "\n"
    << "last_sentence_claims: " << st.last_sentence_claims << "\n";
  o.setf(std::ios::fixed);
  o.precision(3);
  o << "last_sentence_fraction: " << st.last_sentence_fraction << "\n"
    << "claim position (relative, deciles):\n";
  std::size_t peak = 0;
  for (auto c : st.decile_histogram) peak = std::max(peak, c);
  for (int d = 0; d < 10; ++d) {
    const std::size_t c = st.decile_histogram[static_cast<std::size_t>(d)];
    const std::size_t bar = peak == 0 ? 0 : (c * 40 + peak - 1) / peak;
    o << "  (" << d / 10.0 << "," << (d + 1) / 10.0 << "] " << std::string(bar, '#')
      << (bar ? " " : "") << c << "\n";
  }
  ctx.write_output("stats.txt", o.str());
  ctx.out << o.str();
  return kExitOk;
}

int cmd_vote(Context& ctx, const std::string& corpus) {
  std::vector<ClaimRecord> records = load_claim_records(ctx, corpus);
  std::size_t ties = 0;
  std::map<std::pair<std::string, std::string>, std::pair<std::vector<bool>, std::vector<bool>>>
      pairs;
  std::map<std::size_t, std::vector<std::vector<bool>>> by_count;  // raters -> per-rater labels
  std::map<std::size_t, std::size_t> abstracts_by_count;
  for (auto& rec : records) {
    if (rec.annotations.empty()) continue;
    const VoteResult v = majority_vote(rec.annotations);
    ties += v.ties.size();
    rec.gold_labels = v.labels;
    auto anns = rec.annotations;
    std::sort(anns.begin(), anns.end(), [](const AnnotationRecord& x, const AnnotationRecord& y) {
      return x.annotator_id < y.annotator_id;
    });
    for (std::size_t i = 0; i < anns.size(); ++i) {
      for (std::size_t j = i + 1; j < anns.size(); ++j) {
        auto& p = pairs[{anns[i].annotator_id, anns[j].annotator_id}];
        p.first.insert(p.first.end(), anns[i].labels.begin(), anns[i].labels.end());
        p.second.insert(p.second.end(), anns[j].labels.begin(), anns[j].labels.end());
      }
    }
    auto& raters = by_count[anns.size()];
    raters.resize(anns.size());
    for (std::size_t i = 0; i < anns.size(); ++i) {
      raters[i].insert(raters[i].end(), anns[i].labels.begin(), anns[i].labels.end());
    }
    ++abstracts_by_count[anns.size()];
  }
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(3);
  o << "abstracts: " << records.size() << "\n" << "tied_sentences: " << ties << "\n";
  for (const auto& [names, labels] : pairs) {
    const Kappa k = cohen_kappa(labels.first, labels.second);
    o << "cohen_kappa " << names.first << " " << names.second << ": " << k.value
      << (k.degenerate ? " (degenerate)" : "") << " over " << labels.first.size()
      << " sentences\n";
  }
  // Fleiss needs a constant number of raters; use the most common count.
  std::size_t modal = 0, best = 0;
  for (const auto& [n, c] : abstracts_by_count) {
    if (c > best || (c == best && n > modal)) {
      best = c;
      modal = n;
    }
  }
  if (modal >= 2) {
    o << "fleiss_kappa (" << modal << " raters, " << best
      << " abstracts): " << fleiss_kappa(binary_rating_counts(by_count[modal])) << "\n";
  }
  ctx.write_output("voted.jsonl", serialize_claim_corpus(records));
  ctx.write_output("agreement.txt", o.str());
  ctx.out << o.str();
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"claimx: claim extraction for scientific abstracts"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::string out_dir = ".";
  std::uint64_t seed = 13;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", out_dir, "Output directory (created if missing)")
        ->capture_default_str();
    sub->add_option("--seed", seed, "Seed for splits, initialization and shuffling")
        ->capture_default_str();
  };

  PretrainArgs pretrain;
  auto* pre = app.add_subcommand("pretrain", "Train a discourse tagger on a labeled corpus");
  pre->add_option("--corpus", pretrain.corpus, "Discourse corpus (### id / LABEL<TAB>sentence)")
      ->required()
      ->check(CLI::ExistingFile);
  pre->add_option("--val-corpus", pretrain.val_corpus, "Separate validation corpus")
      ->check(CLI::ExistingFile);
  pre->add_flag("--sentence-level", pretrain.sentence_level,
                "Train on single sentences without a CRF");
  add_model_options(pre, pretrain.model);
  common(pre);

  TransferArgs transfer;
  auto* tr = app.add_subcommand("transfer", "Fine-tune a pretrained discourse tagger for claims");
  tr->add_option("--pretrained", transfer.pretrained, "Discourse checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  tr->add_option("--corpus", transfer.corpus, "Claim corpus (JSON lines)")
      ->required()
      ->check(CLI::ExistingFile);
  tr->add_option("--head-epochs", transfer.head_epochs, "Epochs with the body frozen")
      ->capture_default_str();
  add_model_options(tr, transfer.model);
  common(tr);

  TrainArgs train;
  auto* trn = app.add_subcommand("train", "Train a claim tagger from scratch");
  trn->add_option("--corpus", train.corpus,
                  "Claim corpus, or a discourse corpus with --conclusion-as-claim")
      ->required()
      ->check(CLI::ExistingFile);
  trn->add_flag("--conclusion-as-claim", train.conclusion_as_claim,
                "Use CONCLUSIONS sentences of a discourse corpus as claims");
  add_model_options(trn, train.model);
  common(trn);

  EvalArgs ev;
  auto* evc = app.add_subcommand("eval", "Score models on a claim corpus split");
  evc->add_option("--model", ev.models,
                  "last-sentence | rule-based | sif | sif-discourse | tagger (repeatable)")
      ->required()
      ->check(CLI::IsMember({"last-sentence", "rule-based", "sif", "sif-discourse", "tagger"}));
  evc->add_option("--corpus", ev.corpus, "Claim corpus (JSON lines)")
      ->required()
      ->check(CLI::ExistingFile);
  evc->add_option("--split", ev.split, "train | validation | test | all")
      ->check(CLI::IsMember({"train", "validation", "test", "all"}))
      ->capture_default_str();
  evc->add_option("--checkpoint", ev.checkpoint, "Claim tagger checkpoint")
      ->check(CLI::ExistingFile);
  evc->add_option("--discourse-checkpoint", ev.discourse_checkpoint,
                  "Discourse tagger for sif-discourse")
      ->check(CLI::ExistingFile);
  evc->add_option("--rules", ev.rules, "Rule file (default: shipped rules)")
      ->check(CLI::ExistingFile);
  evc->add_option("--embeddings", ev.embeddings, "Word vectors for SIF")->check(CLI::ExistingFile);
  evc->add_option("--freq-file", ev.freq_file, "`token count` lines for SIF weights")
      ->check(CLI::ExistingFile);
  evc->add_option("--sif-dim", ev.sif_dim, "Random vector size when no --embeddings")
      ->capture_default_str();
  evc->add_option("--sif-a", ev.sif_a, "SIF smoothing")->capture_default_str();
  common(evc);

  PredictArgs pr;
  auto* prc = app.add_subcommand("predict", "Tag sentences of abstracts in a text file");
  prc->add_option("--checkpoint", pr.checkpoint, "Tagger checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  prc->add_option("--discourse-checkpoint", pr.discourse_checkpoint,
                  "Discourse tagger for discourse_dist")
      ->check(CLI::ExistingFile);
  prc->add_option("--text-file", pr.text_file, "Abstracts separated by blank lines")
      ->required()
      ->check(CLI::ExistingFile);
  common(prc);

  ServeArgs sv;
  auto* svc = app.add_subcommand("serve", "Run the prediction and annotation HTTP service");
  svc->add_option("--checkpoint", sv.checkpoint, "Claim tagger checkpoint")
      ->envname("CLAIMX_MODEL")
      ->check(CLI::ExistingFile);
  svc->add_option("--discourse-checkpoint", sv.discourse_checkpoint, "Discourse tagger checkpoint")
      ->envname("CLAIMX_DISCOURSE_MODEL")
      ->check(CLI::ExistingFile);
  svc->add_option("--tasks", sv.tasks, "Annotation task file (JSON lines)")
      ->envname("CLAIMX_TASKS")
      ->check(CLI::ExistingFile);
  svc->add_option("--store", sv.store, "Append-only annotation log")->envname("CLAIMX_STORE");
  svc->add_option("--host", sv.host, "Bind address")->envname("CLAIMX_HOST")->capture_default_str();
  svc->add_option("--port", sv.port, "Port")->envname("CLAIMX_PORT")->capture_default_str();
  svc->add_option("--max-body", sv.max_body, "Request body limit in bytes")
      ->envname("CLAIMX_MAX_BODY")
      ->capture_default_str();
  common(svc);

  std::string stats_corpus;
  auto* st = app.add_subcommand("stats", "Claim corpus statistics");
  st->add_option("--corpus", stats_corpus, "Claim corpus (JSON lines)")
      ->required()
      ->check(CLI::ExistingFile);
  common(st);

  std::string vote_corpus;
  auto* vt = app.add_subcommand("vote", "Majority-vote gold labels and agreement scores");
  vt->add_option("--corpus", vote_corpus, "Claim corpus (JSON lines)")
      ->required()
      ->check(CLI::ExistingFile);
  common(vt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  Context ctx{out, err, sub->get_name()};
  ctx.out_dir = out_dir;
  ctx.seed = seed;
  try {
    fs::create_directories(out_dir);
    int code = kExitOk;
    const std::string& name = ctx.command;
    if (name == "pretrain") {
      code = cmd_pretrain(ctx, pretrain);
    } else if (name == "transfer") {
      code = cmd_transfer(ctx, transfer);
    } else if (name == "train") {
      code = cmd_train(ctx, train);
    } else if (name == "eval") {
      code = cmd_eval(ctx, ev);
    } else if (name == "predict") {
      code = cmd_predict(ctx, pr);
    } else if (name == "serve") {
      return cmd_serve(ctx, sv);
    } else if (name == "stats") {
      code = cmd_stats(ctx, stats_corpus);
    } else if (name == "vote") {
      code = cmd_vote(ctx, vote_corpus);
    }
    ctx.write_manifest();
    return code;
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n" << sub->help();
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "error: " << (ctx.last_input.empty() ? "" : ctx.last_input + ": ") << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace claimx

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

#include "claimx/service.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <set>
#include <sstream>
#include <thread>

#include "claimx/checkpoint.hpp"
#include "httplib.h"
#include "json.hpp"

namespace claimx {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

HttpResponse json_response(int status, const ordered_json& body) {
  return {status, body.dump(), "application/json"};
}

HttpResponse error(int status, const std::string& message) {
  ordered_json j;
  j["v"] = kApiVersion;
  j["error"] = message;
  return json_response(status, j);
}

}  // namespace

// ---------------------------------------------------------------------------
// Tasks

std::vector<AnnotationTask> parse_tasks(std::string_view text) {
  std::vector<AnnotationTask> tasks;
  std::set<int> ids;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  int next_id = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError(std::string("task file: ") + e.what(), line_no);
    }
    AnnotationTask t;
    try {
      t.task_id = j.contains("task_id") ? j.at("task_id").get<int>() : next_id;
      t.abstract.id = j.at("id").is_string() ? j.at("id").get<std::string>()
                                             : j.at("id").dump();
      t.abstract.title = j.value("title", "");
      if (j.contains("sentences")) {
        t.abstract.sentences = j.at("sentences").get<std::vector<std::string>>();
      } else {
        for (auto& s : split_sentences(j.at("abstract_text").get<std::string>())) {
          t.abstract.sentences.push_back(std::move(s.text));
        }
      }
      t.instructions_version = j.value("instructions_version", "1");
    } catch (const json::exception& e) {
      throw FormatError(std::string("task file: ") + e.what(), line_no);
    }
    if (t.abstract.sentences.empty()) throw FormatError("task has no sentences", line_no);
    if (!ids.insert(t.task_id).second) {
      throw FormatError("duplicate task id " + std::to_string(t.task_id), line_no);
    }
    next_id = std::max(next_id, t.task_id) + 1;
    tasks.push_back(std::move(t));
  }
  return tasks;
}

std::vector<AnnotationTask> load_tasks(const std::string& path) {
  return parse_tasks(read_file(path));
}

// ---------------------------------------------------------------------------
// Store

AnnotationStore::AnnotationStore(std::vector<AnnotationTask> tasks, std::string log_path)
    : tasks_(std::move(tasks)), log_path_(std::move(log_path)) {
  std::sort(tasks_.begin(), tasks_.end(),
            [](const AnnotationTask& a, const AnnotationTask& b) { return a.task_id < b.task_id; });
  for (std::size_t i = 0; i < tasks_.size(); ++i) {
    if (!index_.emplace(tasks_[i].task_id, i).second) {
      throw ContractViolation("duplicate task id " + std::to_string(tasks_[i].task_id));
    }
  }
  if (log_path_.empty()) return;
  {
    std::ifstream in(log_path_);
    std::string line;
    std::size_t line_no = 0;
    while (in && std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception&) {
        // A torn final write from a crash is the only way to get here; the
        // submission was never acknowledged.
        if (in.peek() == EOF) break;
        throw FormatError("corrupt annotation log " + log_path_, line_no);
      }
      const SubmitResult r =
          apply(j.at("task_id").get<int>(), j.at("annotator").get<std::string>(),
                j.at("indices").get<std::vector<int>>(), std::nullopt,
                j.value("timestamp", std::string()));
      if (r.status != SubmitStatus::kCreated) {
        throw FormatError("annotation log entry rejected: " + r.message, line_no);
      }
    }
  }
  log_.open(log_path_, std::ios::app);
  if (!log_) throw std::runtime_error("cannot open annotation log " + log_path_);
}

const AnnotationTask* AnnotationStore::task(int task_id) const {
  auto it = index_.find(task_id);
  return it == index_.end() ? nullptr : &tasks_[it->second];
}

std::optional<AnnotationTask> AnnotationStore::next_for(const std::string& annotator) const {
  std::shared_lock lock(mu_);
  for (const auto& t : tasks_) {
    auto it = active_.find(t.task_id);
    if (it == active_.end() || !it->second.count(annotator)) return t;
  }
  return std::nullopt;
}

std::size_t AnnotationStore::remaining_for(const std::string& annotator) const {
  std::shared_lock lock(mu_);
  std::size_t n = 0;
  for (const auto& t : tasks_) {
    auto it = active_.find(t.task_id);
    if (it == active_.end() || !it->second.count(annotator)) ++n;
  }
  return n;
}

int AnnotationStore::revision(int task_id, const std::string& annotator) const {
  std::shared_lock lock(mu_);
  auto it = active_.find(task_id);
  if (it == active_.end()) return 0;
  auto s = it->second.find(annotator);
  return s == it->second.end() ? 0 : s->second.revision;
}

SubmitResult AnnotationStore::apply(int task_id, const std::string& annotator,
                                    std::vector<int> indices, std::optional<int> expected_revision,
                                    std::string timestamp) {
  const AnnotationTask* t = task(task_id);
  if (t == nullptr) {
    return {SubmitStatus::kUnknownTask, 0, "unknown task " + std::to_string(task_id)};
  }
  const int n = static_cast<int>(t->abstract.sentences.size());
  std::set<int> seen;
  for (int i : indices) {
    if (i < 0 || i >= n) {
      return {SubmitStatus::kBadIndex, 0,
              "sentence index " + std::to_string(i) + " outside [0, " + std::to_string(n) + ")"};
    }
    if (!seen.insert(i).second) {
      return {SubmitStatus::kBadIndex, 0, "duplicate sentence index " + std::to_string(i)};
    }
  }
  Submission& s = active_[task_id][annotator];
  if (expected_revision && *expected_revision != s.revision) {
    const int current = s.revision;
    if (current == 0) active_[task_id].erase(annotator);
    return {SubmitStatus::kConflict, current,
            "stale revision " + std::to_string(*expected_revision) + ", current is " +
                std::to_string(current)};
  }
  std::sort(indices.begin(), indices.end());
  s.indices = std::move(indices);
  s.timestamp = std::move(timestamp);
  s.revision += 1;
  return {SubmitStatus::kCreated, s.revision, {}};
}

SubmitResult AnnotationStore::submit(int task_id, const std::string& annotator,
                                     std::vector<int> indices,
                                     std::optional<int> expected_revision, std::string timestamp) {
  if (timestamp.empty()) timestamp = utc_now();
  std::unique_lock lock(mu_);
  SubmitResult r = apply(task_id, annotator, indices, expected_revision, timestamp);
  if (r.status != SubmitStatus::kCreated || !log_.is_open()) return r;
  ordered_json j;
  j["v"] = kApiVersion;
  j["task_id"] = task_id;
  j["annotator"] = annotator;
  j["indices"] = active_[task_id][annotator].indices;
  j["timestamp"] = timestamp;
  log_ << j.dump() << '\n';
  log_.flush();
  if (!log_) throw std::runtime_error("failed to append to annotation log " + log_path_);
  return r;
}

std::vector<ClaimRecord> AnnotationStore::export_records() const {
  std::shared_lock lock(mu_);
  std::vector<ClaimRecord> out;
  for (const auto& t : tasks_) {
    auto it = active_.find(t.task_id);
    if (it == active_.end() || it->second.empty()) continue;
    ClaimRecord rec;
    rec.abstract = t.abstract;
    for (const auto& [annotator, s] : it->second) {
      AnnotationRecord a;
      a.abstract_id = t.abstract.id;
      a.annotator_id = annotator;
      a.labels.assign(t.abstract.sentences.size(), false);
      for (int i : s.indices) a.labels[static_cast<std::size_t>(i)] = true;
      a.timestamp = s.timestamp;
      rec.annotations.push_back(std::move(a));
    }
    if (rec.annotations.size() >= 3) rec.gold_labels = majority_vote(rec.annotations).labels;
    out.push_back(std::move(rec));
  }
  return out;
}

std::string AnnotationStore::export_jsonl() const { return serialize_claim_corpus(export_records()); }

// ---------------------------------------------------------------------------
// Endpoints

Service::Service(const TaggerModel* claim_model, const TaggerModel* discourse_model,
                 AnnotationStore* store, std::size_t max_body_bytes)
    : claim_model_(claim_model),
      discourse_model_(discourse_model),
      store_(store),
      max_body_(max_body_bytes) {}

HttpResponse Service::handle(const HttpRequest& req) const {
  if (req.body.size() > max_body_) {
    return error(413, "request body exceeds " + std::to_string(max_body_) + " bytes");
  }
  if (req.method == "POST" && req.path == "/predict") return predict(req.body);
  if (req.method == "GET" && req.path == "/tasks/next") return next_task(req.query);
  if (req.method == "POST" && req.path == "/annotations") return submit(req.body);
  if (req.method == "GET" && req.path == "/annotations/export") return export_annotations();
  if (req.method == "GET" && req.path == "/health") {
    ordered_json j;
    j["v"] = kApiVersion;
    j["claim_model"] = claim_model_ != nullptr;
    j["discourse_model"] = discourse_model_ != nullptr;
    j["tasks"] = store_ ? store_->task_count() : 0;
    return json_response(200, j);
  }
  return error(404, "no route for " + req.method + " " + req.path);
}

HttpResponse Service::predict(const std::string& body) const {
  if (body.size() > max_body_) {
    return error(413, "request body exceeds " + std::to_string(max_body_) + " bytes");
  }
  if (claim_model_ == nullptr) return error(503, "model not loaded");
  json req;
  try {
    req = json::parse(body);
  } catch (const json::exception&) {
    return error(400, "body is not valid JSON");
  }
  if (!req.is_object() || !req.contains("abstract_text") || !req["abstract_text"].is_string()) {
    return error(400, "abstract_text must be a string");
  }
  Abstract abstract;
  abstract.id = req.value("id", std::string());
  abstract.title = req.contains("title") && req["title"].is_string() ? req["title"].get<std::string>()
                                                                     : std::string();
  for (auto& s : split_sentences(req["abstract_text"].get<std::string>())) {
    abstract.sentences.push_back(std::move(s.text));
  }
  if (abstract.sentences.empty()) return error(400, "abstract is empty");

  const std::vector<SentencePrediction> claims = claim_model_->predict(abstract);
  Eigen::MatrixXd discourse;
  if (discourse_model_ != nullptr) {
    discourse = discourse_model_->probabilities(discourse_model_->encode(abstract));
  }
  ordered_json out;
  out["v"] = kApiVersion;
  out["title"] = abstract.title;
  out["sentences"] = ordered_json::array();
  for (std::size_t i = 0; i < claims.size(); ++i) {
    ordered_json s;
    s["index"] = i;
    s["text"] = abstract.sentences[i];
    ordered_json dist = ordered_json::object();
    if (discourse_model_ != nullptr) {
      const auto& names = discourse_model_->label_names();
      for (std::size_t k = 0; k < names.size(); ++k) {
        dist[names[k]] = discourse(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      }
    }
    s["discourse_dist"] = dist;
    s["claim_prob"] = claims[i].claim_prob;
    s["claim"] = claims[i].claim;
    out["sentences"].push_back(std::move(s));
  }
  return json_response(200, out);
}

HttpResponse Service::next_task(const std::map<std::string, std::string>& query) const {
  if (store_ == nullptr) return error(503, "task store not loaded");
  auto it = query.find("annotator");
  if (it == query.end() || it->second.empty()) return error(400, "annotator parameter is required");
  const std::optional<AnnotationTask> t = store_->next_for(it->second);
  if (!t) return {204, "", "application/json"};
  ordered_json j;
  j["v"] = kApiVersion;
  j["task_id"] = t->task_id;
  j["abstract_id"] = t->abstract.id;
  j["title"] = t->abstract.title;
  j["sentences"] = t->abstract.sentences;
  j["instructions_version"] = t->instructions_version;
  j["revision"] = store_->revision(t->task_id, it->second);
  j["remaining"] = store_->remaining_for(it->second);
  return json_response(200, j);
}

HttpResponse Service::submit(const std::string& body) const {
  if (store_ == nullptr) return error(503, "task store not loaded");
  json req;
  try {
    req = json::parse(body);
  } catch (const json::exception&) {
    return error(400, "body is not valid JSON");
  }
  int task_id = 0;
  std::string annotator;
  std::vector<int> indices;
  std::optional<int> revision;
  try {
    task_id = req.at("task_id").get<int>();
    annotator = req.at("annotator").get<std::string>();
    indices = req.at("indices").get<std::vector<int>>();
    if (req.contains("revision") && !req["revision"].is_null()) {
      revision = req["revision"].get<int>();
    }
  } catch (const json::exception&) {
    return error(400, "expected {task_id: int, annotator: string, indices: [int], revision?: int}");
  }
  if (annotator.empty()) return error(400, "annotator must be non-empty");
  const SubmitResult r = store_->submit(task_id, annotator, std::move(indices), revision);
  switch (r.status) {
    case SubmitStatus::kUnknownTask:
      return error(404, r.message);
    case SubmitStatus::kBadIndex:
      return error(422, r.message);
    case SubmitStatus::kConflict: {
      ordered_json j;
      j["v"] = kApiVersion;
      j["error"] = r.message;
      j["revision"] = r.revision;
      return json_response(409, j);
    }
    case SubmitStatus::kCreated:
      break;
  }
  ordered_json j;
  j["v"] = kApiVersion;
  j["task_id"] = task_id;
  j["annotator"] = annotator;
  j["revision"] = r.revision;
  return json_response(201, j);
}

HttpResponse Service::export_annotations() const {
  if (store_ == nullptr) return error(503, "task store not loaded");
  return {200, store_->export_jsonl(), "application/x-ndjson"};
}

// ---------------------------------------------------------------------------
// Transport

struct HttpServer::Impl {
  explicit Impl(const Service& s) : service(s) {}
  const Service& service;
  httplib::Server server;
  std::thread thread;
};

HttpServer::HttpServer(const Service& service) : impl_(std::make_unique<Impl>(service)) {
  auto& srv = impl_->server;
  // Let the handler produce the 413 so the body keeps the JSON error shape.
  srv.set_payload_max_length(service.max_body_bytes() + 1);
  auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
    HttpRequest r{req.method, req.path, {}, req.body};
    for (const auto& [k, v] : req.params) r.query.emplace(k, v);
    HttpResponse out;
    try {
      out = impl_->service.handle(r);
    } catch (const std::exception& e) {
      out = error(500, e.what());
    }
    res.status = out.status;
    if (out.status != 204) res.set_content(out.body, out.content_type);
    res.set_header("Access-Control-Allow-Origin", "*");
  };
  srv.Get(".*", dispatch);
  srv.Post(".*", dispatch);
  srv.Options(".*", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.status = 204;
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  auto& srv = impl_->server;
  int bound = port;
  if (port == 0) {
    bound = srv.bind_to_any_port(host);
  } else if (!srv.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([&srv] { srv.listen_after_bind(); });
  srv.wait_until_ready();
  return bound;
}

void HttpServer::run(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
  }
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace claimx

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

#ifndef CLAIMX_SERVICE_HPP_
#define CLAIMX_SERVICE_HPP_

#include <cstddef>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "claimx/corpus.hpp"
#include "claimx/tagger.hpp"

namespace claimx {

inline constexpr int kApiVersion = 1;

/// An abstract queued for annotation. Sentences are split once, when the task
/// file is loaded, and never change afterwards.
struct AnnotationTask {
  int task_id = 0;
  Abstract abstract;
  std::string instructions_version = "1";
};

// JSON lines: {"id", "title", "sentences": [...]} or {"id", "title",
// "abstract_text"}; an optional integer "task_id" overrides the file order.
std::vector<AnnotationTask> parse_tasks(std::string_view text);
std::vector<AnnotationTask> load_tasks(const std::string& path);

struct Submission {
  std::vector<int> indices;
  std::string timestamp;
  int revision = 0;  // 1 for the first submission, +1 per resubmission
};

enum class SubmitStatus { kCreated, kUnknownTask, kBadIndex, kConflict };

struct SubmitResult {
  SubmitStatus status = SubmitStatus::kCreated;
  int revision = 0;
  std::string message;
};

/// Task queue plus submissions, persisted to an append-only JSON-lines log
/// that is replayed on construction. Writers are serialized; readers share.
class AnnotationStore {
 public:
  // An empty `log_path` keeps submissions in memory only.
  AnnotationStore(std::vector<AnnotationTask> tasks, std::string log_path);

  const AnnotationTask* task(int task_id) const;
  std::size_t task_count() const { return tasks_.size(); }
  // Lowest-id task this annotator has not submitted.
  std::optional<AnnotationTask> next_for(const std::string& annotator) const;
  // Tasks this annotator has not submitted yet.
  std::size_t remaining_for(const std::string& annotator) const;
  // Number of submissions so far for (task, annotator).
  int revision(int task_id, const std::string& annotator) const;

  // `expected_revision`, when set, must equal revision() or the call
  // conflicts. Resubmission replaces the active record; the log keeps all.
  SubmitResult submit(int task_id, const std::string& annotator, std::vector<int> indices,
                      std::optional<int> expected_revision = std::nullopt,
                      std::string timestamp = {});

  // Claim-corpus records for every task with at least one submission. Gold
  // labels are included when three or more annotators submitted.
  std::vector<ClaimRecord> export_records() const;
  std::string export_jsonl() const;

 private:
  SubmitResult apply(int task_id, const std::string& annotator, std::vector<int> indices,
                     std::optional<int> expected_revision, std::string timestamp);

  std::vector<AnnotationTask> tasks_;  // sorted by task_id
  std::map<int, std::size_t> index_;
  std::map<int, std::map<std::string, Submission>> active_;
  std::string log_path_;
  std::ofstream log_;
  mutable std::shared_mutex mu_;
};

struct HttpRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Endpoint logic, independent of the HTTP transport.
class Service {
 public:
  // Any pointer may be null: /predict answers 503 without a claim model, and
  // the task endpoints answer 503 without a store.
  Service(const TaggerModel* claim_model, const TaggerModel* discourse_model,
          AnnotationStore* store, std::size_t max_body_bytes = 1 << 20);

  HttpResponse handle(const HttpRequest& request) const;

  HttpResponse predict(const std::string& body) const;
  HttpResponse next_task(const std::map<std::string, std::string>& query) const;
  HttpResponse submit(const std::string& body) const;
  HttpResponse export_annotations() const;

  std::size_t max_body_bytes() const { return max_body_; }

 private:
  const TaggerModel* claim_model_;
  const TaggerModel* discourse_model_;
  AnnotationStore* store_;
  std::size_t max_body_;
};

/// Serves a Service over HTTP on a background thread pool.
class HttpServer {
 public:
  explicit HttpServer(const Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds and starts listening in the background. Port 0 picks a free port.
  // Returns the bound port.
  int start(const std::string& host, int port);
  // Binds and serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace claimx

#endif  // CLAIMX_SERVICE_HPP_

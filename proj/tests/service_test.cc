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

#include <filesystem>
#include <fstream>
#include <thread>

#include "claimx/service.hpp"
#include "httplib.h"
#include "json.hpp"
#include "test_util.hpp"
#include "toy_model.hpp"

namespace claimx {
namespace {

using nlohmann::json;

const TaggerModel& toy_model() {
  static const TaggerModel model = testing::train_marker_model();
  return model;
}

std::string temp_path(const std::string& name) {
  const auto dir = std::filesystem::path(::testing::TempDir()) / "claimx_service";
  std::filesystem::create_directories(dir);
  const auto p = dir / name;
  std::filesystem::remove(p);
  return p.string();
}

HttpRequest get(std::string path, std::map<std::string, std::string> query = {}) {
  return {"GET", std::move(path), std::move(query), ""};
}
HttpRequest post(std::string path, const json& body) { return {"POST", std::move(path), {}, body.dump()}; }

std::vector<AnnotationTask> tasks() { return load_tasks(testing::fixture("tasks_small.jsonl")); }

TEST(Tasks, ParseSplitsOnce) {
  const auto t = tasks();
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0].task_id, 1);
  EXPECT_EQ(t[1].task_id, 2);
  EXPECT_EQ(t[1].abstract.id, "202");
  EXPECT_EQ(t[1].abstract.sentences,
            (std::vector<std::string>{"We found an effect.", "It was small.", "Mean was 3.5 mm.",
                                      "See Fig. 2 for details.", "Done."}));
  EXPECT_THROW(parse_tasks("{\"id\":\"1\",\"title\":\"t\",\"sentences\":[\"a\"],\"task_id\":3}\n"
                           "{\"id\":\"2\",\"title\":\"t\",\"sentences\":[\"b\"],\"task_id\":3}\n"),
               FormatError);
}

TEST(Predict, ShapeRangeAndDeterminism) {
  const Service svc(&toy_model(), nullptr, nullptr);
  const json body = {{"title", "T"}, {"abstract_text", "W1 w2 w3. W4 w5. W6 zmark w7."}};
  const HttpResponse r = svc.handle(post("/predict", body));
  ASSERT_EQ(r.status, 200) << r.body;
  const json j = json::parse(r.body);
  EXPECT_EQ(j["v"], kApiVersion);
  ASSERT_EQ(j["sentences"].size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& s = j["sentences"][i];
    EXPECT_EQ(s["index"], i);
    EXPECT_GE(s["claim_prob"].get<double>(), 0.0);
    EXPECT_LE(s["claim_prob"].get<double>(), 1.0);
  }
  EXPECT_EQ(j["sentences"][2]["text"], "W6 zmark w7.");
  EXPECT_TRUE(j["sentences"][2]["claim"].get<bool>());
  EXPECT_FALSE(j["sentences"][0]["claim"].get<bool>());
  EXPECT_EQ(svc.handle(post("/predict", body)).body, r.body);
}

TEST(Predict, DiscourseDistributionWhenAvailable) {
  const Service svc(&toy_model(), &toy_model(), nullptr);
  const HttpResponse r = svc.handle(post("/predict", {{"abstract_text", "W1. Zmark w2."}}));
  ASSERT_EQ(r.status, 200);
  const json dist = json::parse(r.body)["sentences"][0]["discourse_dist"];
  double total = 0.0;
  for (const auto& [k, v] : dist.items()) total += v.get<double>();
  EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST(Predict, Errors) {
  const Service svc(&toy_model(), nullptr, nullptr, 64);
  EXPECT_EQ(svc.handle(post("/predict", {{"abstract_text", "   "}})).status, 400);
  EXPECT_EQ(svc.handle({"POST", "/predict", {}, "not json"}).status, 400);
  EXPECT_EQ(svc.handle(post("/predict", {{"abstract_text", std::string(100, 'x')}})).status, 413);
  const Service empty(nullptr, nullptr, nullptr);
  EXPECT_EQ(empty.handle(post("/predict", {{"abstract_text", "A."}})).status, 503);
  EXPECT_EQ(empty.handle(get("/tasks/next", {{"annotator", "a"}})).status, 503);
  EXPECT_EQ(svc.handle(get("/nowhere")).status, 404);
  EXPECT_EQ(svc.handle(get("/health")).status, 200);
}

TEST(Annotations, NextTaskPerAnnotator) {
  AnnotationStore store(tasks(), "");
  const Service svc(nullptr, nullptr, &store);
  EXPECT_EQ(svc.handle(get("/tasks/next")).status, 400);
  HttpResponse r = svc.handle(get("/tasks/next", {{"annotator", "A"}}));
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(json::parse(r.body)["task_id"], 1);
  EXPECT_EQ(json::parse(r.body)["remaining"], 2);

  EXPECT_EQ(svc.handle(post("/annotations", {{"task_id", 1}, {"annotator", "A"}, {"indices", {0}}})).status, 201);
  r = svc.handle(get("/tasks/next", {{"annotator", "A"}}));
  EXPECT_EQ(json::parse(r.body)["task_id"], 2);
  EXPECT_EQ(json::parse(r.body)["remaining"], 1);
  EXPECT_EQ(json::parse(svc.handle(get("/tasks/next", {{"annotator", "B"}})).body)["task_id"], 1);

  EXPECT_EQ(svc.handle(post("/annotations", {{"task_id", 2}, {"annotator", "A"}, {"indices", json::array()}})).status, 201);
  EXPECT_EQ(svc.handle(get("/tasks/next", {{"annotator", "A"}})).status, 204);
}

TEST(Annotations, SubmissionErrors) {
  AnnotationStore store(tasks(), "");
  const Service svc(nullptr, nullptr, &store);
  EXPECT_EQ(svc.handle(post("/annotations", {{"task_id", 9}, {"annotator", "A"}, {"indices", {0}}})).status, 404);
  EXPECT_EQ(svc.handle(post("/annotations", {{"task_id", 2}, {"annotator", "A"}, {"indices", {7}}})).status, 422);
  EXPECT_EQ(svc.handle(post("/annotations", {{"task_id", 1}, {"annotator", "A"}, {"indices", {1, 1}}})).status, 422);
  EXPECT_EQ(svc.handle(post("/annotations", {{"task_id", 1}, {"indices", {0}}})).status, 400);
  EXPECT_EQ(svc.handle({"POST", "/annotations", {}, "{"}).status, 400);
}

TEST(Annotations, RevisionConflict) {
  AnnotationStore store(tasks(), "");
  const Service svc(nullptr, nullptr, &store);
  const json first = {{"task_id", 1}, {"annotator", "A"}, {"indices", {0}}, {"revision", 0}};
  EXPECT_EQ(svc.handle(post("/annotations", first)).status, 201);
  // A second writer that also saw revision 0 loses the race.
  HttpResponse r = svc.handle(post("/annotations", first));
  ASSERT_EQ(r.status, 409);
  EXPECT_EQ(json::parse(r.body)["revision"], 1);
  json retry = first;
  retry["revision"] = 1;
  retry["indices"] = {2};
  r = svc.handle(post("/annotations", retry));
  ASSERT_EQ(r.status, 201);
  EXPECT_EQ(json::parse(r.body)["revision"], 2);
  const auto records = store.export_records();
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].annotations[0].labels, (std::vector<bool>{false, false, true}));
}

TEST(Annotations, ExportCarriesMajorityVoteAndRoundTrips) {
  AnnotationStore store(tasks(), "");
  store.submit(1, "A", {0, 2});
  store.submit(1, "B", {2});
  store.submit(1, "C", {0});
  store.submit(2, "A", {4});
  const Service svc(nullptr, nullptr, &store);
  const HttpResponse r = svc.handle(get("/annotations/export"));
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.content_type, "application/x-ndjson");
  const auto records = parse_claim_text(r.body);
  ASSERT_EQ(records.size(), 2u);
  ASSERT_TRUE(records[0].gold_labels.has_value());
  EXPECT_EQ(*records[0].gold_labels, majority_vote(records[0].annotations).labels);
  EXPECT_EQ(*records[0].gold_labels, (std::vector<bool>{true, false, true}));
  EXPECT_FALSE(records[1].gold_labels.has_value());
  EXPECT_EQ(serialize_claim_corpus(records), r.body);
}

TEST(Annotations, LogReplaySurvivesRestartAndTornTail) {
  const std::string log = temp_path("store.log");
  {
    AnnotationStore store(tasks(), log);
    store.submit(1, "A", {1}, std::nullopt, "2024-01-01T00:00:00Z");
    store.submit(1, "A", {2});
    store.submit(2, "B", {0, 3});
  }
  std::ofstream(log, std::ios::app) << "{\"v\":1,\"task_id\":2,\"annot";
  AnnotationStore again(tasks(), log);
  EXPECT_EQ(again.revision(1, "A"), 2);
  EXPECT_EQ(again.revision(2, "B"), 1);
  const auto records = again.export_records();
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].annotations[0].labels, (std::vector<bool>{false, false, true}));
  EXPECT_EQ(again.next_for("B")->task_id, 1);
}

TEST(Annotations, ConcurrentWritersAllLand) {
  AnnotationStore store(tasks(), temp_path("concurrent.log"));
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&store, t] {
      for (int task = 1; task <= 2; ++task) store.submit(task, "ann" + std::to_string(t), {0});
    });
  }
  for (auto& th : threads) th.join();
  for (int t = 0; t < 8; ++t) EXPECT_FALSE(store.next_for("ann" + std::to_string(t)).has_value());
}

TEST(HttpTransport, ServesHandler) {
  AnnotationStore store(tasks(), "");
  const Service svc(&toy_model(), nullptr, &store);
  HttpServer server(svc);
  const int port = server.start("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  httplib::Client client("127.0.0.1", port);
  auto res = client.Get("/tasks/next?annotator=Z");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["task_id"], 1);
  res = client.Post("/predict", json{{"abstract_text", "w1 zmark."}}.dump(), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->body, svc.handle(post("/predict", {{"abstract_text", "w1 zmark."}})).body);
  server.stop();
}

}  // namespace
}  // namespace claimx

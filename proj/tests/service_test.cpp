/*
 * Copyright 2026 The XAL Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <thread>

#include "gtest/gtest.h"
#include "xal/service.hpp"

namespace xal {
namespace {

using nlohmann::json;

const char* kSmallToy =
    "experiment = tracking\n"
    "dataset.kind = toy\n"
    "dataset.n_per_gaussian = 40\n"
    "explainer.samples = 200\n"
    "loop.initial_size = 10\n"
    "loop.initial_groups = Q1,Q3\n"
    "loop.steps = 12\n"
    "batch.features = x,y\n";

class ServiceTest : public ::testing::Test {
 protected:
  LabelService service{ExperimentConfig::parse(kSmallToy), "small-toy"};

  ServiceResponse call(const std::string& method, const std::string& path, const json& body = {}) {
    return service.handle(method, path, body.is_null() ? "" : body.dump());
  }

  std::string create(json body = json::object()) {
    const auto r = call("POST", "/sessions", body);
    EXPECT_EQ(r.status, 201) << r.body.dump();
    return r.body.at("session").get<std::string>();
  }
};

TEST_F(ServiceTest, CreateShowsTheFirstQuery) {
  const auto r = call("POST", "/sessions", json::object());
  ASSERT_EQ(r.status, 201);
  EXPECT_EQ(r.body["status"], "awaiting_label");
  EXPECT_EQ(r.body["query_id"], "q1");
  EXPECT_EQ(r.body["round"], 0);
  EXPECT_TRUE(r.body["query"]["explanation"]["constraints"].is_array());
  EXPECT_EQ(r.body["query"]["features"].size(), 2u);
  // Asking again returns the same pending query.
  const auto again = call("GET", "/sessions/" + r.body["session"].get<std::string>() + "/next");
  EXPECT_EQ(again.body["query_id"], "q1");
  EXPECT_EQ(again.body["query"]["index"], r.body["query"]["index"]);
}

TEST_F(ServiceTest, LabelAdvancesAndShrinksThePool) {
  const auto id = create();
  const auto before = call("GET", "/sessions");
  const std::size_t pool = before.body["sessions"][0]["pool"];
  const auto r = call("POST", "/sessions/" + id + "/label", {{"query_id", "q1"}, {"label", 1}});
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_EQ(r.body["round"], 1);
  const auto after = call("GET", "/sessions");
  EXPECT_EQ(after.body["sessions"][0]["pool"], pool - 1);
  EXPECT_EQ(call("GET", "/sessions/" + id + "/next").body["query_id"], "q2");
}

TEST_F(ServiceTest, StaleQueryIdIsAConflictAndChangesNothing) {
  const auto id = create();
  call("POST", "/sessions/" + id + "/label", {{"query_id", "q1"}, {"label", 0}});
  call("GET", "/sessions/" + id + "/next");
  const auto snap = call("GET", "/sessions/" + id + "/snapshot").body;
  const auto r = call("POST", "/sessions/" + id + "/label", {{"query_id", "q1"}, {"label", 1}});
  EXPECT_EQ(r.status, 409);
  EXPECT_EQ(call("GET", "/sessions/" + id + "/snapshot").body, snap);
}

TEST_F(ServiceTest, MalformedRequests) {
  const auto id = create();
  const std::string label = "/sessions/" + id + "/label";
  EXPECT_EQ(service.handle("POST", label, "{not json").status, 400);
  EXPECT_EQ(service.handle("POST", label, "[1, 2]").status, 400);
  EXPECT_EQ(call("POST", label, {{"label", 1}}).status, 400);
  EXPECT_EQ(call("POST", label, {{"query_id", "q1"}, {"label", 2}}).status, 400);
  EXPECT_EQ(call("POST", label, {{"query_id", "q1"}, {"label", "yes"}}).status, 400);
  EXPECT_EQ(call("POST", label, {{"query_id", "q1"}}).status, 400);
  EXPECT_EQ(call("POST", "/sessions", {{"mode", "stream"}}).status, 400);
  EXPECT_EQ(call("POST", "/sessions", {{"preset", "unknown"}}).status, 400);
  EXPECT_EQ(call("POST", "/sessions", {{"config", "loop.steps = x\n"}}).status, 400);
  EXPECT_EQ(call("POST", "/sessions", {{"seed", -1}}).status, 400);
  EXPECT_EQ(call("GET", "/sessions/nope/next").status, 404);
  EXPECT_EQ(call("GET", "/sessions/" + id + "/frobnicate").status, 404);
  EXPECT_EQ(call("GET", "/elsewhere").status, 404);
  // Nothing above touched the session.
  EXPECT_EQ(call("GET", "/sessions/" + id + "/snapshot").body["round"], 0);
}

TEST_F(ServiceTest, SkipOffersTheNextCandidate) {
  const auto id = create();
  const auto first = call("GET", "/sessions/" + id + "/next").body;
  const auto r = call("POST", "/sessions/" + id + "/label", {{"query_id", "q1"}, {"skip", true}});
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["round"], 0);
  const auto second = call("GET", "/sessions/" + id + "/next").body;
  EXPECT_EQ(second["query_id"], "q2");
  EXPECT_NE(second["query"]["index"], first["query"]["index"]);
  EXPECT_LE(first["query"]["certainty"].get<double>(), second["query"]["certainty"].get<double>());
}

TEST_F(ServiceTest, AutoHistoryAndDone) {
  const auto id = create();
  const auto r = call("POST", "/sessions/" + id + "/auto", {{"steps", 5}});
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["round"], 5);
  const auto h = call("GET", "/sessions/" + id + "/history").body;
  EXPECT_EQ(h["rounds"], 6);
  ASSERT_EQ(h["series"].size(), 4u);
  for (const auto& s : h["series"]) {
    EXPECT_EQ(s["bias"].size(), 6u);
    for (const auto& b : s["bias"]) EXPECT_TRUE(b.is_null() || b.is_number());
  }
  const auto rest = call("POST", "/sessions/" + id + "/auto", {{"steps", 100}});
  EXPECT_EQ(rest.body["answered"], 7);
  EXPECT_EQ(rest.body["status"], "done");
  EXPECT_EQ(call("GET", "/sessions/" + id + "/next").body["status"], "done");
  EXPECT_EQ(call("POST", "/sessions/" + id + "/label", {{"query_id", "q13"}, {"label", 1}}).status, 409);
  EXPECT_EQ(call("POST", "/sessions/" + id + "/auto", {{"steps", -2}}).status, 400);
}

TEST_F(ServiceTest, ClustersReportAtTheCurrentModel) {
  const auto id = create();
  call("POST", "/sessions/" + id + "/auto", {{"steps", 2}});
  const auto r = call("GET", "/sessions/" + id + "/clusters");
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_EQ(r.body["round"], 2);
  EXPECT_GE(r.body["k"].get<std::size_t>(), 2u);
  EXPECT_EQ(r.body["clusters"].size(), r.body["k"].get<std::size_t>());
  std::size_t total = 0;
  for (const auto& c : r.body["clusters"]) total += c["size"].get<std::size_t>();
  EXPECT_EQ(total, 160u);
}

TEST_F(ServiceTest, ReplayReproducesTheSequence) {
  const auto id = create({{"seed", 4}});
  const std::string base = "/sessions/" + id;
  call("POST", base + "/label", {{"query_id", "q1"}, {"label", 1}});
  call("GET", base + "/next");
  call("POST", base + "/label", {{"query_id", "q2"}, {"skip", true}});
  call("POST", base + "/auto", {{"steps", 3}});
  const auto snap = call("GET", base + "/snapshot").body;

  const auto r = call("POST", "/sessions/replay", snap);
  ASSERT_EQ(r.status, 201) << r.body.dump();
  const auto copy = r.body["session"].get<std::string>();
  const auto snap2 = call("GET", "/sessions/" + copy + "/snapshot").body;
  ASSERT_EQ(snap2["events"].size(), snap["events"].size());
  for (std::size_t i = 0; i < snap["events"].size(); ++i) {
    for (const char* k : {"type", "query_id", "indices", "labels", "round"}) {
      EXPECT_EQ(snap2["events"][i][k], snap["events"][i][k]) << "event " << i << " " << k;
    }
  }
  EXPECT_EQ(call("GET", "/sessions/" + copy + "/next").body["query"]["index"],
            call("GET", base + "/next").body["query"]["index"]);
  EXPECT_EQ(call("GET", "/sessions/" + copy + "/history").body["series"],
            call("GET", base + "/history").body["series"]);

  auto tampered = snap;
  tampered["events"][0]["indices"] = json::array({9999});
  EXPECT_EQ(call("POST", "/sessions/replay", tampered).status, 409);
}

TEST_F(ServiceTest, BatchModeLabelsTheWholeBatchAtOnce) {
  const auto r = call("POST", "/sessions", {{"mode", "batch"}, {"batch_size", 6}});
  ASSERT_EQ(r.status, 201) << r.body.dump();
  const auto id = r.body["session"].get<std::string>();
  const auto& batch = r.body["batch"];
  const auto members = batch["members"].get<std::vector<std::size_t>>();
  ASSERT_EQ(members.size(), 6u);
  EXPECT_FALSE(batch["regions"].empty());
  EXPECT_NE(batch["text"].get<std::string>().find("Batch of 6 queries"), std::string::npos);
  const std::size_t pool = call("GET", "/sessions").body["sessions"][0]["pool"];

  json partial = json::array();
  partial.push_back({{"index", members[0]}, {"label", 1}});
  EXPECT_EQ(call("POST", "/sessions/" + id + "/label", {{"query_id", "q1"}, {"labels", partial}}).status, 400);

  json full = json::array();
  for (std::size_t i : members) full.push_back({{"index", i}, {"label", 0}});
  const auto ok = call("POST", "/sessions/" + id + "/label", {{"query_id", "q1"}, {"labels", full}});
  ASSERT_EQ(ok.status, 200) << ok.body.dump();
  EXPECT_EQ(ok.body["round"], 1);
  EXPECT_EQ(call("GET", "/sessions").body["sessions"][0]["pool"], pool - 6);
}

TEST_F(ServiceTest, ConcurrentRequestsOnOneSessionAreSerialised) {
  const auto id = create();
  std::vector<std::thread> workers;
  for (int t = 0; t < 3; ++t) {
    workers.emplace_back([&] { call("POST", "/sessions/" + id + "/auto", {{"steps", 3}}); });
  }
  for (auto& w : workers) w.join();
  EXPECT_EQ(call("GET", "/sessions/" + id + "/snapshot").body["round"], 9);
}

TEST(ServiceHttp, RoundTripOverASocket) {
  LabelService service{ExperimentConfig::parse(kSmallToy), "small-toy"};
  httplib::Server server;
  service.mount(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  const auto created = client.Post("/sessions", "{}", "application/json");
  ASSERT_TRUE(created);
  EXPECT_EQ(created->status, 201);
  const auto id = json::parse(created->body)["session"].get<std::string>();
  const auto labeled = client.Post("/sessions/" + id + "/label", R"({"query_id": "q1", "label": 0})",
                                   "application/json");
  ASSERT_TRUE(labeled);
  EXPECT_EQ(labeled->status, 200);
  const auto stale = client.Post("/sessions/" + id + "/label", R"({"query_id": "q1", "label": 0})",
                                 "application/json");
  EXPECT_EQ(stale->status, 409);
  const auto next = client.Get("/sessions/" + id + "/next");
  EXPECT_EQ(json::parse(next->body)["query_id"], "q2");
  EXPECT_EQ(next->get_header_value("Content-Type"), "application/json");

  server.stop();
  th.join();
}

}  // namespace
}  // namespace xal

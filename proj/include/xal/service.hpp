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

// JSON-over-HTTP labelling sessions.
//
//   POST /sessions                  {"preset": name} or {"config": text} (both optional), plus
//                                   "seed", "steps", "mode": "query" | "batch",
//                                   "batch_size"
//   GET  /sessions                  session ids and status
//   GET  /sessions/{id}/next        pending query (or batch) with explanation
//   POST /sessions/{id}/label       {"query_id", "label": 0|1} or {"query_id", "skip": true};
//                                   batch mode: {"query_id", "labels": [{"index", "label"}]}
//   POST /sessions/{id}/auto        {"steps": n} answers with the simulated oracle
//   GET  /sessions/{id}/history     per-region bias series
//   GET  /sessions/{id}/clusters    cluster report at the current model
//   GET  /sessions/{id}/snapshot    config + event log
//   POST /sessions/replay           snapshot body; rebuilds a session by replay
//
// Every pending item has a query id. A label for any other id is rejected
// with 409 and leaves the session untouched; malformed bodies get 400.

#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "xal/batch.hpp"
#include "xal/cluster.hpp"
#include "xal/config.hpp"
#include "xal/learner.hpp"

// After Eigen: httplib pulls in <resolv.h>, whose `_res` macro breaks Eigen.
#include "httplib.h"

namespace xal {

struct ServiceResponse {
  int status = 200;
  nlohmann::json body;
};

class BadRequest : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

struct SessionEvent {
  std::size_t seq = 0;
  std::string type;  // shown | labeled | skipped
  std::string query_id;
  std::vector<std::size_t> indices;
  std::vector<int> labels;
  std::size_t round = 0;
  double time = 0.0;  // seconds since session start

  nlohmann::json to_json() const {
    return {{"seq", seq},   {"type", type},   {"query_id", query_id}, {"indices", indices},
            {"labels", labels}, {"round", round}, {"time", time}};
  }
};

enum class SessionMode { query, batch };

class Session {
 public:
  Session(std::string id, std::string config_text, std::string preset, SessionMode mode,
          std::size_t batch_size)
      : id_(std::move(id)),
        config_text_(std::move(config_text)),
        preset_(std::move(preset)),
        mode_(mode),
        batch_size_(batch_size),
        started_(std::chrono::steady_clock::now()) {
    cfg_ = ExperimentConfig::parse(config_text_);
    data_ = std::make_unique<TabularDataset>(load_experiment_dataset(cfg_.dataset));
    seed_ = run_seed(cfg_.seed, 0);
    RunSpec rs{cfg_.initial_size, initial_candidates(cfg_, *data_), cfg_.steps, seed_};
    LearnerConfig lc = cfg_.learner;
    lc.explain_queries = true;
    learner_ = std::make_unique<Learner>(*data_, experiment_regions(cfg_, *data_), lc,
                                         sample_initial_pool(data_->size(), rs), seed_);
  }

  std::mutex& mutex() { return mutex_; }
  const std::string& id() const { return id_; }
  const Learner& learner() const { return *learner_; }
  const std::vector<SessionEvent>& events() const { return events_; }

  bool done() const {
    const auto& st = learner_->state();
    if (st.round >= cfg_.steps || st.pool.empty()) return true;
    return st.pool.size() == learner_->skipped().size();
  }

  std::string status() const {
    if (done()) return "done";
    return pending_ ? "awaiting_label" : "computing";
  }

  /// Current pending item, computed on first request.
  nlohmann::json next() {
    if (done()) return summary();
    if (!pending_) make_pending();
    return pending_json();
  }

  nlohmann::json label(const nlohmann::json& body) {
    if (!body.is_object() || !body.contains("query_id") || !body["query_id"].is_string()) {
      throw BadRequest("body must be an object with a string query_id");
    }
    const bool skip = body.value("skip", false);
    const std::string qid = body["query_id"].get<std::string>();
    std::vector<std::pair<std::size_t, int>> items;
    if (!skip) items = parse_labels(body);
    if (done()) throw ConflictError("session is done");
    if (!pending_ || qid != pending_->query_id) {
      throw ConflictError("query_id '" + qid + "' is not the pending query");
    }
    if (skip) {
      for (std::size_t i : pending_->indices) learner_->skip(i);
      log_event("skipped", pending_->query_id, pending_->indices, {});
    } else {
      std::vector<std::size_t> idx;
      std::vector<int> labs;
      for (const auto& [i, l] : items) {
        idx.push_back(i);
        labs.push_back(l);
      }
      if (mode_ == SessionMode::query) {
        learner_->apply_label(idx[0], labs[0]);
      } else {
        learner_->apply_labels(items);
      }
      log_event("labeled", pending_->query_id, idx, labs);
    }
    pending_.reset();
    return {{"accepted", true}, {"round", learner_->state().round}, {"status", status()}};
  }

  /// Answers up to `steps` pending items with the held labels.
  nlohmann::json auto_step(std::size_t steps) {
    std::size_t answered = 0;
    for (; answered < steps && !done(); ++answered) {
      if (!pending_) make_pending();
      nlohmann::json body{{"query_id", pending_->query_id}};
      if (mode_ == SessionMode::query) {
        body["label"] = data_->label(pending_->indices[0]);
      } else {
        auto arr = nlohmann::json::array();
        for (std::size_t i : pending_->indices) arr.push_back({{"index", i}, {"label", data_->label(i)}});
        body["labels"] = arr;
      }
      label(body);
    }
    return {{"answered", answered}, {"round", learner_->state().round}, {"status", status()}};
  }

  nlohmann::json history() const {
    const auto& h = learner_->state().history;
    auto series = nlohmann::json::array();
    for (std::size_t r = 0; r < h.regions.size(); ++r) {
      auto bias = nlohmann::json::array();
      for (const auto& b : h.bias[r]) bias.push_back(b ? nlohmann::json(*b) : nlohmann::json(nullptr));
      series.push_back({{"region", h.regions[r]}, {"bias", bias}, {"count", h.counts[r]}});
    }
    return {{"session", id_}, {"rounds", h.rounds()}, {"regions", h.regions}, {"series", series}};
  }

  nlohmann::json clusters() {
    const std::size_t round = learner_->state().round;
    if (!clusters_ || clusters_round_ != round) {
      ClusterSpec cs = cfg_.cluster;
      if (cs.labels.mode == LabelMode::top_m && cs.labels.top_m == 0) {
        cs.labels.top_m = cfg_.learner.explainer.num_features;
      }
      const auto epoch = cluster_explanations(*learner_, cs, 1);
      clusters_ = cluster_report(epoch.model, epoch.vocabulary, cfg_.learner.explainer.num_features);
      (*clusters_)["round"] = round;
      clusters_round_ = round;
    }
    return *clusters_;
  }

  nlohmann::json snapshot() const {
    auto ev = nlohmann::json::array();
    for (const auto& e : events_) ev.push_back(e.to_json());
    return {{"session", id_},
            {"config", config_text_},
            {"preset", preset_},
            {"mode", mode_ == SessionMode::query ? "query" : "batch"},
            {"batch_size", batch_size_},
            {"seed", seed_},
            {"round", learner_->state().round},
            {"events", ev}};
  }

  /// Re-applies recorded decisions; each shown item must match the recording.
  void replay(const nlohmann::json& events) {
    for (const auto& e : events) {
      const std::string type = e.at("type").get<std::string>();
      if (type == "shown") {
        if (!pending_) make_pending();
        const auto idx = e.at("indices").get<std::vector<std::size_t>>();
        if (idx != pending_->indices) {
          throw ConflictError("replay diverged at event " + e.at("seq").dump());
        }
      } else if (type == "skipped") {
        if (!pending_) make_pending();
        label({{"query_id", pending_->query_id}, {"skip", true}});
      } else if (type == "labeled") {
        const auto idx = e.at("indices").get<std::vector<std::size_t>>();
        const auto labs = e.at("labels").get<std::vector<int>>();
        if (!pending_) make_pending();
        nlohmann::json body{{"query_id", pending_->query_id}};
        if (mode_ == SessionMode::query) {
          body["label"] = labs.at(0);
        } else {
          auto arr = nlohmann::json::array();
          for (std::size_t k = 0; k < idx.size(); ++k) arr.push_back({{"index", idx[k]}, {"label", labs[k]}});
          body["labels"] = arr;
        }
        label(body);
      } else {
        throw BadRequest("unknown event type '" + type + "'");
      }
    }
  }

  nlohmann::json summary() const {
    return {{"session", id_},
            {"status", status()},
            {"round", learner_->state().round},
            {"labeled", learner_->state().labeled.size()},
            {"pool", learner_->state().pool.size()},
            {"mode", mode_ == SessionMode::query ? "query" : "batch"},
            {"regions", learner_->regions().names()}};
  }

 private:
  struct Pending {
    std::string query_id;
    std::vector<std::size_t> indices;
    nlohmann::json payload;
  };

  void make_pending() {
    Pending p;
    p.query_id = "q" + std::to_string(++query_seq_);
    nlohmann::json payload;
    if (mode_ == SessionMode::query) {
      const PendingQuery q = learner_->propose();
      p.indices = {q.query_index};
      payload = {{"index", q.query_index},
                 {"certainty", q.certainty},
                 {"region", q.region >= 0 ? nlohmann::json(learner_->regions().names()[q.region])
                                          : nlohmann::json(nullptr)},
                 {"features", features(q.query_index)},
                 {"explanation", q.explanation->to_json()},
                 {"region_constraints", q.explanation->region().to_string()}};
    } else {
      BatchRequest req{batch_size_, cfg_.batch.strategies.back(), cfg_.batch_features};
      const auto batch = compose_batch(*learner_, req, mix_seed(seed_, learner_->state().round));
      p.indices = batch.members;
      payload = batch_to_json(batch, *data_, cfg_.batch_features);
      auto members = nlohmann::json::array();
      for (std::size_t i : batch.members) {
        members.push_back({{"index", i}, {"certainty", learner_->certainties()[i]}, {"features", features(i)}});
      }
      payload["member_rows"] = members;
      payload["text"] = render_batch_explanation(batch, *data_, cfg_.batch_features);
    }
    p.payload = std::move(payload);
    pending_ = std::move(p);
    log_event("shown", pending_->query_id, pending_->indices, {});
  }

  nlohmann::json pending_json() const {
    nlohmann::json j{{"session", id_},
                     {"status", status()},
                     {"round", learner_->state().round},
                     {"mode", mode_ == SessionMode::query ? "query" : "batch"},
                     {"query_id", pending_->query_id}};
    j[mode_ == SessionMode::query ? "query" : "batch"] = pending_->payload;
    return j;
  }

  nlohmann::json features(std::size_t i) const {
    auto arr = nlohmann::json::array();
    for (std::size_t j = 0; j < data_->num_features(); ++j) {
      const auto& f = data_->feature(j);
      const double v = data_->at(i, j);
      nlohmann::json fj{{"name", f.name}, {"display", f.display_hint.value_or(f.name)}};
      if (f.kind == FeatureKind::categorical) {
        fj["value"] = f.categories[static_cast<std::size_t>(v)];
      } else {
        fj["value"] = v;
      }
      arr.push_back(std::move(fj));
    }
    return arr;
  }

  std::vector<std::pair<std::size_t, int>> parse_labels(const nlohmann::json& body) const {
    auto as_label = [](const nlohmann::json& v) {
      if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1)) {
        throw BadRequest("label must be 0 or 1");
      }
      return v.get<int>();
    };
    std::vector<std::pair<std::size_t, int>> items;
    if (mode_ == SessionMode::query) {
      if (!body.contains("label")) throw BadRequest("body needs 'label' or 'skip'");
      if (!pending_) return items;
      items.emplace_back(pending_->indices[0], as_label(body["label"]));
      return items;
    }
    if (!body.contains("labels") || !body["labels"].is_array()) {
      throw BadRequest("batch mode needs a 'labels' array");
    }
    for (const auto& e : body["labels"]) {
      if (!e.is_object() || !e.contains("index") || !e["index"].is_number_unsigned()) {
        throw BadRequest("each label needs a non-negative integer 'index'");
      }
      items.emplace_back(e["index"].get<std::size_t>(), as_label(e.value("label", nlohmann::json())));
    }
    if (pending_) {
      std::vector<std::size_t> got;
      for (const auto& [i, l] : items) got.push_back(i);
      std::vector<std::size_t> want = pending_->indices;
      std::sort(got.begin(), got.end());
      std::sort(want.begin(), want.end());
      if (got != want) throw BadRequest("labels must cover exactly the pending batch members");
    }
    return items;
  }

  void log_event(std::string type, const std::string& qid, std::vector<std::size_t> idx,
                 std::vector<int> labs) {
    SessionEvent e;
    e.seq = events_.size();
    e.type = std::move(type);
    e.query_id = qid;
    e.indices = std::move(idx);
    e.labels = std::move(labs);
    e.round = learner_->state().round;
    e.time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
    events_.push_back(std::move(e));
  }

  std::string id_;
  std::string config_text_;
  std::string preset_;
  SessionMode mode_;
  std::size_t batch_size_;
  ExperimentConfig cfg_;
  std::unique_ptr<TabularDataset> data_;
  std::unique_ptr<Learner> learner_;
  std::uint64_t seed_ = 0;
  std::optional<Pending> pending_;
  std::size_t query_seq_ = 0;
  std::vector<SessionEvent> events_;
  std::optional<nlohmann::json> clusters_;
  std::size_t clusters_round_ = 0;
  std::mutex mutex_;
  std::chrono::steady_clock::time_point started_;
};

/// Session registry and request dispatch, independent of the HTTP transport.
class LabelService {
 public:
  /// Sessions created without "preset" or "config" use `default_config`.
  explicit LabelService(ExperimentConfig default_config = preset_config("toy-fig2"),
                        std::string default_name = "toy-fig2")
      : default_config_(std::move(default_config)), default_name_(std::move(default_name)) {}

  ServiceResponse handle(const std::string& method, const std::string& path,
                         const std::string& body_text) {
    try {
      return dispatch(method, path, body_text);
    } catch (const BadRequest& e) {
      return {400, {{"error", e.what()}}};
    } catch (const ConfigError& e) {
      return {400, {{"error", e.what()}}};
    } catch (const NotFound& e) {
      return {404, {{"error", e.what()}}};
    } catch (const ConflictError& e) {
      return {409, {{"error", e.what()}}};
    } catch (const nlohmann::json::exception& e) {
      return {400, {{"error", std::string("malformed JSON: ") + e.what()}}};
    } catch (const std::exception& e) {
      return {500, {{"error", e.what()}}};
    }
  }

  /// Routes every endpoint onto an httplib server.
  void mount(httplib::Server& server) {
    auto bridge = [this](const httplib::Request& req, httplib::Response& res) {
      const auto r = handle(req.method, req.path, req.body);
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
    server.Post(R"(/sessions(/.*)?)", bridge);
    server.Get(R"(/sessions(/.*)?)", bridge);
  }

 private:
  ServiceResponse dispatch(const std::string& method, const std::string& path,
                           const std::string& body_text) {
    const auto parts = split_path(path);
    if (parts.empty() || parts[0] != "sessions") throw NotFound("no route for " + path);
    if (parts.size() == 1) {
      if (method == "POST") return create(parse_body(body_text));
      if (method == "GET") return {200, list()};
      throw NotFound("no route for " + method + " " + path);
    }
    if (parts.size() == 2 && parts[1] == "replay" && method == "POST") {
      return replay(parse_body(body_text));
    }
    if (parts.size() != 3) throw NotFound("no route for " + path);
    auto session = find(parts[1]);
    std::lock_guard<std::mutex> lock(session->mutex());
    const std::string& op = parts[2];
    if (method == "GET" && op == "next") return {200, session->next()};
    if (method == "GET" && op == "history") return {200, session->history()};
    if (method == "GET" && op == "clusters") return {200, session->clusters()};
    if (method == "GET" && op == "snapshot") return {200, session->snapshot()};
    if (method == "POST" && op == "label") return {200, session->label(parse_body(body_text))};
    if (method == "POST" && op == "auto") {
      const auto body = parse_body(body_text);
      const auto steps = body.value("steps", 1);
      if (steps < 0) throw BadRequest("steps must be >= 0");
      return {200, session->auto_step(static_cast<std::size_t>(steps))};
    }
    throw NotFound("no route for " + method + " " + path);
  }

  static std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> out;
    for (auto& p : split(path, '/')) {
      if (!p.empty()) out.push_back(std::move(p));
    }
    return out;
  }

  static nlohmann::json parse_body(const std::string& text) {
    if (trim(text).empty()) return nlohmann::json::object();
    auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw BadRequest("request body must be a JSON object");
    return j;
  }

  std::shared_ptr<Session> find(const std::string& id) {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFound("no session '" + id + "'");
    return it->second;
  }

  std::shared_ptr<Session> build(const nlohmann::json& body) {
    std::string preset;
    ExperimentConfig cfg;
    if (body.contains("config")) {
      if (!body["config"].is_string()) throw BadRequest("config must be a string");
      cfg = ExperimentConfig::parse(body["config"].get<std::string>());
    } else if (body.contains("preset")) {
      if (!body["preset"].is_string()) throw BadRequest("preset must be a string");
      preset = body["preset"].get<std::string>();
      cfg = preset_config(preset);
    } else {
      preset = default_name_;
      cfg = default_config_;
    }
    if (body.contains("seed")) {
      if (!body["seed"].is_number_unsigned()) throw BadRequest("seed must be a non-negative integer");
      cfg.seed = body["seed"].get<std::uint64_t>();
    }
    if (body.contains("steps")) {
      if (!body["steps"].is_number_unsigned()) throw BadRequest("steps must be a non-negative integer");
      cfg.steps = body["steps"].get<std::size_t>();
    }
    const std::string mode = body.value("mode", "query");
    if (mode != "query" && mode != "batch") throw BadRequest("mode must be query or batch");
    const std::size_t batch_size = body.value("batch_size", cfg.batch.batch_size);
    if (batch_size < 1) throw BadRequest("batch_size must be >= 1");
    std::string id;
    {
      std::lock_guard<std::mutex> lock(mutex_);
      id = "s" + std::to_string(++session_seq_);
    }
    return std::make_shared<Session>(id, cfg.to_text(), preset,
                                     mode == "query" ? SessionMode::query : SessionMode::batch,
                                     batch_size);
  }

  ServiceResponse create(const nlohmann::json& body) {
    auto session = build(body);
    nlohmann::json out;
    {
      std::lock_guard<std::mutex> lock(session->mutex());
      out = session->next();
    }
    std::lock_guard<std::mutex> lock(mutex_);
    sessions_[session->id()] = session;
    return {201, out};
  }

  ServiceResponse replay(const nlohmann::json& snap) {
    nlohmann::json body{{"config", snap.at("config")},
                        {"mode", snap.value("mode", "query")},
                        {"batch_size", snap.value("batch_size", std::size_t{50})}};
    auto session = build(body);
    {
      std::lock_guard<std::mutex> lock(session->mutex());
      session->replay(snap.at("events"));
    }
    std::lock_guard<std::mutex> lock(mutex_);
    sessions_[session->id()] = session;
    return {201, session->summary()};
  }

  nlohmann::json list() {
    std::lock_guard<std::mutex> lock(mutex_);
    auto arr = nlohmann::json::array();
    for (const auto& [id, s] : sessions_) {
      std::lock_guard<std::mutex> slock(s->mutex());
      arr.push_back(s->summary());
    }
    return {{"sessions", arr}};
  }

  ExperimentConfig default_config_;
  std::string default_name_;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::size_t session_seq_ = 0;
};

}  // namespace xal

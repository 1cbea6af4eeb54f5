// Copyright 2026 The km4 Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "km4/evaluator.hpp"
#include "km4/reconciler.hpp"
#include "km4/workspace.hpp"

namespace km4::api {

struct Request {
  std::string method;  // GET, POST
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;  // names lowercased
  std::string body;
};

struct Response {
  int status = 200;
  nlohmann::json body;
};

inline constexpr size_t kPageSize = 50;

/// Transport-independent request handling over a workspace. Every handler
/// is safe to call concurrently.
///
/// Review decisions need an `X-Operator-Id` header. A request token (the
/// `Idempotency-Key` header or a `requestToken` body member) makes a
/// decision replayable: the same token with the same body returns the
/// recorded response, with a different body it is a 409.
class Service {
 public:
  explicit Service(Workspace& ws, reconcile::MethodConfig cfg = {});

  Response handle(const Request& req);

  /// Replaces the review queue and auto links from one reconciliation run
  /// over the workspace services.
  nlohmann::json run_reconciliation(reconcile::Method method);

  std::vector<reconcile::ReviewItem> queue() const;
  std::vector<nlohmann::json> audit() const;

 private:
  Response get_quads(const Request& req);
  Response get_geo_near(const Request& req);
  Response post_reconcile(const Request& req);
  Response get_review(const Request& req);
  Response post_decision(const Request& req, const std::string& id);
  Response get_metrics();
  Response get_datasets();
  Response get_health();
  Response get_audit(const Request& req);

  void record_audit(nlohmann::json entry);

  Workspace& ws_;
  reconcile::MethodConfig cfg_;
  reconcile::ToponymCatalog catalog_;
  std::optional<eval::GoldAlignment> gold_;

  mutable std::mutex mutex_;
  std::map<std::string, reconcile::ReviewItem> items_;
  std::vector<std::string> order_;  // queue order; skipped items move to the tail
  std::vector<reconcile::MatchCandidate> auto_links_;
  std::vector<reconcile::MatchCandidate> accepted_links_;
  std::map<std::string, std::pair<std::string, Response>> tokens_;  // token -> (request fingerprint, response)
  std::vector<nlohmann::json> audit_;
};

/// HTTP front end for a Service.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  /// Binds `port`, or an ephemeral port when it is 0. Returns the bound
  /// port, or -1.
  int bind(const std::string& host, int port);
  /// Serves on the bound socket until stop().
  bool listen_after_bind();
  /// Blocks until listen_after_bind() is accepting connections.
  void wait_until_ready() const;
  void stop();
  bool is_running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace km4::api

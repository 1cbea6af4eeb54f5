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

#include "km4/api_service.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <httplib.h>

#include "km4/common.hpp"

namespace km4::api {

using nlohmann::json;
using reconcile::MatchCandidate;
using reconcile::ReviewItem;
using reconcile::ReviewState;

namespace {

Response error(int status, const std::string& message) { return Response{status, json{{"error", message}}}; }

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kParse: return 400;
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kConflict: return 409;
    default: return 500;
  }
}

const std::string* param(const Request& req, const std::string& name) {
  auto it = req.query.find(name);
  return it == req.query.end() || it->second.empty() ? nullptr : &it->second;
}

std::optional<Iri> iri_param(const Request& req, const std::string& name) {
  const std::string* v = param(req, name);
  if (!v) return std::nullopt;
  if (!Iri::is_valid(*v)) throw_error(ErrorCode::kInvalidArgument, "bad IRI in '" + name + "': " + *v);
  return Iri(*v);
}

double number_param(const std::string& name, const std::string& text) {
  size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::logic_error&) {
    used = 0;
  }
  if (used != text.size() || !std::isfinite(v)) throw_error(ErrorCode::kInvalidArgument, "bad number in '" + name + "'");
  return v;
}

size_t count_param(const Request& req, const std::string& name, size_t fallback, size_t max) {
  const std::string* v = param(req, name);
  if (!v) return fallback;
  if (v->find_first_not_of("0123456789") != std::string::npos || v->size() > 9) {
    throw_error(ErrorCode::kInvalidArgument, "'" + name + "' must be a positive integer");
  }
  size_t n = std::stoul(*v);
  if (n == 0 || n > max) {
    throw_error(ErrorCode::kInvalidArgument, "'" + name + "' must be in [1, " + std::to_string(max) + "]");
  }
  return n;
}

json quad_json(const Quad& q) {
  json j{{"s", q.subject.str()}, {"p", q.predicate.str()}, {"o", q.object.value()}, {"c", q.context.str()}};
  if (q.object.is_literal()) j["datatype"] = std::string(datatype_iri(q.object.datatype()));
  return j;
}

json candidate_json(const MatchCandidate& c, size_t index) {
  json j{{"index", index},
         {"road", c.road.str()},
         {"level", std::string(reconcile::to_string(c.level))},
         {"method", std::string(reconcile::to_string(c.method))},
         {"score", c.score}};
  j["streetNumber"] = c.street_number ? json(c.street_number->str()) : json(nullptr);
  return j;
}

json item_json(const ReviewItem& it) {
  json cands = json::array();
  for (size_t i = 0; i < it.candidates.size(); ++i) cands.push_back(candidate_json(it.candidates[i], i));
  json j{{"id", it.id},
         {"service", it.service.str()},
         {"state", std::string(reconcile::to_string(it.state))},
         {"topScore", it.candidates.empty() ? 0.0 : it.candidates.front().score},
         {"candidates", cands}};
  j["chosen"] = it.chosen ? json(*it.chosen) : json(nullptr);
  j["decidedBy"] = it.decided_by ? json(*it.decided_by) : json(nullptr);
  j["decidedAt"] = it.decided_at ? json(format_datetime(*it.decided_at)) : json(nullptr);
  return j;
}

json summary_json(const reconcile::Summary& s) {
  return json{{"services", s.services},          {"numberLevel", s.number_level}, {"streetLevel", s.street_level},
              {"autoAccepted", s.auto_accepted}, {"review", s.review},            {"noMatch", s.no_match},
              {"unresolvedWithCoordinates", s.unresolved_with_coordinates}};
}

bool open_state(ReviewState s) { return s == ReviewState::kPending || s == ReviewState::kSkipped; }

}  // namespace

Service::Service(Workspace& ws, reconcile::MethodConfig cfg)
    : ws_(ws), cfg_(cfg), catalog_(ws.catalog()), gold_(ws.gold()) {
  cfg_.validate();
  auto path = ws_.file("audit.jsonl");
  if (std::filesystem::exists(path)) {
    for (const auto& line : split(read_file(path.string()), '\n')) {
      if (trim(line).empty()) continue;
      try {
        audit_.push_back(json::parse(line));
      } catch (const json::exception&) {
        // a torn final line from an interrupted write
      }
    }
  }
}

Response Service::handle(const Request& req) {
  try {
    const std::string& p = req.path;
    if (req.method == "GET") {
      if (p == "/health") return get_health();
      if (p == "/quads") return get_quads(req);
      if (p == "/geo/near") return get_geo_near(req);
      if (p == "/review") return get_review(req);
      if (p == "/metrics") return get_metrics();
      if (p == "/datasets") return get_datasets();
      if (p == "/audit") return get_audit(req);
    } else if (req.method == "POST") {
      if (p == "/reconcile/run") return post_reconcile(req);
      const std::string prefix = "/review/";
      const std::string suffix = "/decision";
      if (starts_with(p, prefix) && ends_with(p, suffix) && p.size() > prefix.size() + suffix.size()) {
        return post_decision(req, p.substr(prefix.size(), p.size() - prefix.size() - suffix.size()));
      }
    } else {
      return error(405, "method not allowed");
    }
    return error(404, "no route for " + req.method + " " + p);
  } catch (const Error& e) {
    return error(status_for(e.code()), e.what());
  } catch (const json::exception& e) {
    return error(400, std::string("bad JSON: ") + e.what());
  } catch (const std::exception& e) {
    return error(500, e.what());
  }
}

Response Service::get_health() {
  return Response{200, json{{"status", "ok"}, {"quads", ws_.store().size()}, {"datasets", ws_.pipeline().datasets().size()}}};
}

Response Service::get_quads(const Request& req) {
  store::Pattern pat;
  pat.subject = iri_param(req, "s");
  pat.predicate = iri_param(req, "p");
  pat.context = iri_param(req, "c");
  if (const std::string* o = param(req, "o")) {
    if ((*o)[0] == '"') {
      // A literal in N-Quads syntax, e.g. "12"^^<...#integer>.
      try {
        pat.object = parse_nquads_line("<urn:x:s> <urn:x:p> " + *o + " <urn:x:c> .").object;
      } catch (const Error&) {
        throw_error(ErrorCode::kInvalidArgument, "bad literal in 'o': " + *o);
      }
    } else {
      pat.object = iri_param(req, "o");
    }
  }
  size_t limit = count_param(req, "limit", kPageSize, kPageSize);
  const std::string* closure = param(req, "closure");
  bool use_closure = closure && (*closure == "true" || *closure == "1");
  std::vector<Quad> rows = use_closure ? ws_.store().match_with_closure(pat) : ws_.store().match(pat);
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());

  auto begin = rows.begin();
  if (const std::string* cursor = param(req, "cursor")) {
    Quad after;
    try {
      after = parse_nquads_line(percent_decode(*cursor));
    } catch (const Error&) {
      throw_error(ErrorCode::kInvalidArgument, "bad cursor");
    }
    begin = std::upper_bound(rows.begin(), rows.end(), after);
  }
  json out = json::array();
  auto it = begin;
  for (; it != rows.end() && out.size() < limit; ++it) out.push_back(quad_json(*it));
  json body{{"quads", out}, {"count", out.size()}};
  body["next"] = it != rows.end() ? json(percent_encode(to_nquads_line(*std::prev(it)))) : json(nullptr);
  return Response{200, body};
}

Response Service::get_geo_near(const Request& req) {
  const std::string* lat = param(req, "lat");
  const std::string* lon = param(req, "lon");
  if (!lat || !lon) return error(400, "lat and lon are required");
  double la = number_param("lat", *lat);
  double lo = number_param("lon", *lon);
  if (la < -90 || la > 90) return error(400, "lat out of range [-90, 90]");
  if (lo < -180 || lo > 180) return error(400, "lon out of range [-180, 180]");
  size_t k = 10;
  if (const std::string* kp = param(req, "k")) {
    if (*kp == "0") return error(400, "k must be at least 1");
    k = count_param(req, "k", 10, 10000);
  }
  double max = 1000;
  if (const std::string* mp = param(req, "max")) {
    max = number_param("max", *mp);
    if (max <= 0) return error(400, "max must be positive");
  }
  std::optional<std::string> cls;
  if (const std::string* c = param(req, "class")) cls = *c;
  json hits = json::array();
  for (const auto& h : ws_.store().geo_near(geo::GeoPoint{la, lo}, k, max, cls)) {
    hits.push_back(json{{"entity", h.entity.str()}, {"distance", h.distance_meters}});
  }
  return Response{200, json{{"hits", hits}}};
}

json Service::run_reconciliation(reconcile::Method method) {
  auto services = ws_.services();
  if (services.empty()) throw_error(ErrorCode::kNotFound, "no services to reconcile");
  reconcile::MethodConfig cfg = cfg_;
  if (!reconcile::is_exact(method)) cfg.metric = method;
  auto result = reconcile::reconcile_corpus(services, catalog_, method, cfg);
  size_t inserted = 0;
  size_t conflicts = 0;
  std::lock_guard lock(mutex_);
  for (const auto& l : result.links) {
    try {
      inserted += reconcile::apply_decision(l, ws_.store(), catalog_).size();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kConflict) throw;
      ++conflicts;
    }
  }
  auto_links_ = result.links;
  items_.clear();
  order_.clear();
  for (auto& item : result.review_queue) {
    order_.push_back(item.id);
    items_.emplace(item.id, std::move(item));
  }
  json body{{"method", std::string(reconcile::to_string(method))},
            {"summary", summary_json(result.summary)},
            {"links", result.links.size()},
            {"quadsInserted", inserted},
            {"conflicts", conflicts},
            {"queued", order_.size()}};
  return body;
}

Response Service::post_reconcile(const Request& req) {
  reconcile::Method method = reconcile::Method::kExact1;
  if (!trim(req.body).empty()) {
    json b = json::parse(req.body);
    if (b.contains("method")) {
      auto m = reconcile::method_from_string(b.at("method").get<std::string>());
      if (!m || *m == reconcile::Method::kManual) return error(400, "unknown method");
      method = *m;
    }
  }
  json body = run_reconciliation(method);
  json entry{{"time", format_datetime(now_utc())}, {"action", "reconcile"}, {"method", body["method"]}};
  auto op = req.headers.find("x-operator-id");
  entry["operator"] = op == req.headers.end() ? json(nullptr) : json(op->second);
  record_audit(std::move(entry));
  return Response{200, body};
}

Response Service::get_review(const Request& req) {
  std::string state = param(req, "state") ? *param(req, "state") : "open";
  static const std::set<std::string> kStates{"open", "all", "pending", "accepted", "rejected", "skipped"};
  if (!kStates.count(state)) return error(400, "unknown state filter: " + state);
  std::optional<Iri> service = iri_param(req, "service");
  size_t limit = count_param(req, "limit", kPageSize, kPageSize);
  std::lock_guard lock(mutex_);
  size_t start = 0;
  if (const std::string* cursor = param(req, "cursor")) {
    auto pos = std::find(order_.begin(), order_.end(), *cursor);
    if (pos == order_.end()) return error(400, "bad cursor");
    start = static_cast<size_t>(pos - order_.begin()) + 1;
  }
  json out = json::array();
  std::optional<std::string> last;
  size_t i = start;
  for (; i < order_.size(); ++i) {
    const ReviewItem& it = items_.at(order_[i]);
    bool keep = state == "all" || (state == "open" ? open_state(it.state) : reconcile::to_string(it.state) == state);
    if (!keep || (service && it.service != *service)) continue;
    if (out.size() == limit) break;
    out.push_back(item_json(it));
    last = it.id;
  }
  json body{{"items", out}, {"count", out.size()}};
  body["next"] = i < order_.size() && last ? json(*last) : json(nullptr);
  return Response{200, body};
}

Response Service::post_decision(const Request& req, const std::string& id) {
  auto op = req.headers.find("x-operator-id");
  if (op == req.headers.end() || trim(op->second).empty()) return error(400, "missing X-Operator-Id header");
  json b = trim(req.body).empty() ? json::object() : json::parse(req.body);
  if (!b.is_object()) return error(400, "body must be a JSON object");
  std::optional<std::string> token;
  if (auto h = req.headers.find("idempotency-key"); h != req.headers.end() && !h->second.empty()) token = h->second;
  if (b.contains("requestToken")) {
    token = b.at("requestToken").get<std::string>();
    b.erase("requestToken");
  }
  std::string fingerprint = id + "\n" + op->second + "\n" + b.dump();

  std::lock_guard lock(mutex_);
  if (token) {
    auto t = tokens_.find(*token);
    if (t != tokens_.end()) {
      if (t->second.first != fingerprint) return error(409, "request token reused for a different request");
      return t->second.second;
    }
  }
  auto found = items_.find(id);
  if (found == items_.end()) return error(404, "no review item " + id);
  ReviewItem& item = found->second;
  if (!open_state(item.state)) {
    return error(409, "review item " + id + " is already " + std::string(reconcile::to_string(item.state)));
  }
  if (!b.contains("action") || !b.at("action").is_string()) return error(400, "action is required");
  std::string action = b.at("action").get<std::string>();
  DateTime now = now_utc();
  json entry{{"time", format_datetime(now)}, {"operator", op->second}, {"item", id},
             {"service", item.service.str()}, {"action", action}};

  if (action == "accept") {
    if (!b.contains("candidate") || !b.at("candidate").is_number_integer()) {
      return error(400, "accept needs an integer candidate index");
    }
    auto idx = b.at("candidate").get<long long>();
    if (idx < 0 || static_cast<size_t>(idx) >= item.candidates.size()) return error(400, "candidate index out of range");
    MatchCandidate chosen = item.candidates[static_cast<size_t>(idx)];
    chosen.method = reconcile::Method::kManual;
    reconcile::apply_decision(chosen, ws_.store(), catalog_);
    accepted_links_.push_back(chosen);
    item.state = ReviewState::kAccepted;
    item.chosen = static_cast<size_t>(idx);
    entry["candidate"] = idx;
    entry["road"] = chosen.road.str();
  } else if (action == "reject") {
    item.state = ReviewState::kRejected;
  } else if (action == "skip") {
    item.state = ReviewState::kSkipped;
    order_.erase(std::find(order_.begin(), order_.end(), id));
    order_.push_back(id);
  } else {
    return error(400, "action must be accept, reject or skip");
  }
  if (item.state != ReviewState::kSkipped) {
    item.decided_by = op->second;
    item.decided_at = now;
  }
  record_audit(entry);
  Response resp{200, item_json(item)};
  if (token) tokens_[*token] = {fingerprint, resp};
  return resp;
}

Response Service::get_metrics() {
  std::lock_guard lock(mutex_);
  std::vector<MatchCandidate> links = auto_links_;
  links.insert(links.end(), accepted_links_.begin(), accepted_links_.end());
  size_t pending = 0;
  for (const auto& [id, it] : items_) pending += open_state(it.state) ? 1 : 0;
  json body{{"autoLinks", auto_links_.size()},
            {"acceptedLinks", accepted_links_.size()},
            {"queued", items_.size()},
            {"pending", pending}};
  if (gold_) {
    auto m = eval::score(links, *gold_);
    body["liveMetrics"] = json{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},
                               {"tp", m.counts.tp},       {"fp", m.counts.fp},   {"fn", m.counts.fn}};
  } else {
    body["liveMetrics"] = nullptr;
  }
  return Response{200, body};
}

Response Service::get_datasets() {
  json out = json::array();
  for (const auto& d : ws_.pipeline().datasets()) {
    json j{{"id", d.id},
           {"status", std::string(ingest::to_string(d.status))},
           {"format", std::string(ingest::to_string(d.original_format))},
           {"processType", std::string(ingest::to_string(d.process_type))},
           {"macroclass", std::string(schema::to_string(d.macroclass))},
           {"context", ingest::dataset_context_iri(d.id)},
           {"source", d.source}};
    j["lastUpdate"] = d.last_update ? json(format_datetime(*d.last_update)) : json(nullptr);
    out.push_back(std::move(j));
  }
  return Response{200, json{{"datasets", out}}};
}

Response Service::get_audit(const Request& req) {
  size_t limit = count_param(req, "limit", kPageSize, kPageSize);
  std::lock_guard lock(mutex_);
  size_t start = 0;
  if (const std::string* cursor = param(req, "cursor")) {
    if (cursor->find_first_not_of("0123456789") != std::string::npos || cursor->size() > 9) {
      return error(400, "bad cursor");
    }
    start = std::stoul(*cursor);
  }
  json out = json::array();
  size_t i = start;
  for (; i < audit_.size() && out.size() < limit; ++i) out.push_back(audit_[i]);
  json body{{"entries", out}};
  body["next"] = i < audit_.size() ? json(std::to_string(i)) : json(nullptr);
  return Response{200, body};
}

void Service::record_audit(json entry) {
  std::ofstream f(ws_.file("audit.jsonl"), std::ios::app);
  f << entry.dump() << '\n';
  f.flush();
  audit_.push_back(std::move(entry));
}

std::vector<ReviewItem> Service::queue() const {
  std::lock_guard lock(mutex_);
  std::vector<ReviewItem> out;
  for (const auto& id : order_) out.push_back(items_.at(id));
  return out;
}

std::vector<json> Service::audit() const {
  std::lock_guard lock(mutex_);
  return audit_;
}

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;

  explicit Impl(Service& s) : service(s) {
    auto handler = [this](const httplib::Request& in, httplib::Response& out) {
      Request req;
      req.method = in.method;
      req.path = in.path;
      for (const auto& [k, v] : in.params) req.query.emplace(k, v);
      for (const auto& [k, v] : in.headers) req.headers.emplace(to_lower_ascii(k), v);
      req.body = in.body;
      Response r = service.handle(req);
      out.status = r.status;
      out.set_content(r.body.dump(), "application/json");
    };
    server.Get(".*", handler);
    server.Post(".*", handler);
  }
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {}
HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}
bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }
void HttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}
void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }
bool HttpServer::is_running() const { return impl_->server.is_running(); }

}  // namespace km4::api

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

#include "km4/km4.h"

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "km4/api_service.hpp"
#include "km4/common.hpp"
#include "km4/corpus.hpp"
#include "km4/evaluator.hpp"
#include "km4/workspace.hpp"

using nlohmann::json;

struct km4_workspace {
  std::unique_ptr<km4::Workspace> ws;
};

struct km4_server {
  std::unique_ptr<km4::api::Service> service;
  std::unique_ptr<km4::api::HttpServer> http;
  std::thread thread;
};

namespace {

thread_local std::string g_last_error;

km4_status to_status(km4::ErrorCode code) {
  switch (code) {
    case km4::ErrorCode::kInvalidArgument: return KM4_ERR_INVALID_ARGUMENT;
    case km4::ErrorCode::kNotFound: return KM4_ERR_NOT_FOUND;
    case km4::ErrorCode::kConflict: return KM4_ERR_CONFLICT;
    case km4::ErrorCode::kIo: return KM4_ERR_IO;
    case km4::ErrorCode::kParse: return KM4_ERR_PARSE;
    case km4::ErrorCode::kInternal: return KM4_ERR_INTERNAL;
  }
  return KM4_ERR_INTERNAL;
}

template <class F>
km4_status guard(F&& f) {
  g_last_error.clear();
  try {
    f();
    return KM4_OK;
  } catch (const km4::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const json::exception& e) {
    g_last_error = e.what();
    return KM4_ERR_PARSE;
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return KM4_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return KM4_ERR_INTERNAL;
  }
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(const void* p, const char* what) {
  if (!p) km4::throw_error(km4::ErrorCode::kInvalidArgument, std::string(what) + " must not be NULL");
}

json report_json(const km4::ingest::IngestReport& r) {
  return json{{"dataset", r.dataset_id},
              {"rows", r.rows},
              {"newVersions", r.new_versions},
              {"quadsMapped", r.quads_mapped},
              {"quadsInserted", r.quads_inserted},
              {"status", std::string(km4::ingest::to_string(r.status))},
              {"diagnostics", r.diagnostics}};
}

json metrics_json(const km4::eval::MetricsReport& m) {
  return json{{"precision", m.precision}, {"recall", m.recall},   {"f1", m.f1},
              {"tp", m.counts.tp},        {"fp", m.counts.fp},     {"fn", m.counts.fn},
              {"noPredictions", m.no_predictions}};
}

std::vector<std::string> method_list(const char* methods) {
  std::string m = methods ? methods : "all";
  if (m == "all") return km4::eval::all_methods();
  std::vector<std::string> out;
  for (const auto& part : km4::split(m, ',')) {
    std::string t = km4::trim(part);
    if (!t.empty()) out.push_back(t);
  }
  if (out.empty()) km4::throw_error(km4::ErrorCode::kInvalidArgument, "empty method list");
  return out;
}

}  // namespace

extern "C" {

const char* km4_version(void) { return "0.1.0"; }

const char* km4_status_name(km4_status status) {
  switch (status) {
    case KM4_OK: return "ok";
    case KM4_ERR_INVALID_ARGUMENT: return "invalid argument";
    case KM4_ERR_NOT_FOUND: return "not found";
    case KM4_ERR_CONFLICT: return "conflict";
    case KM4_ERR_IO: return "i/o error";
    case KM4_ERR_PARSE: return "parse error";
    case KM4_ERR_INTERNAL: return "internal error";
  }
  return "unknown";
}

const char* km4_last_error(void) { return g_last_error.c_str(); }

void km4_string_free(char* s) { std::free(s); }

km4_status km4_schema_dump(char** out_text) {
  return guard([&] {
    require(out_text, "out_text");
    *out_text = dup(km4::schema::load_schema().dump());
  });
}

km4_status km4_workspace_open(const char* dir, km4_workspace** out) {
  return guard([&] {
    require(dir, "dir");
    require(out, "out");
    auto h = std::make_unique<km4_workspace>();
    h->ws = std::make_unique<km4::Workspace>(dir);
    *out = h.release();
  });
}

void km4_workspace_close(km4_workspace* ws) { delete ws; }

km4_status km4_dataset_register(km4_workspace* ws, const char* descriptor, const char* mapping, char** out_context) {
  return guard([&] {
    require(ws, "ws");
    require(descriptor, "descriptor");
    require(mapping, "mapping");
    auto d = km4::ingest::DatasetDescriptor::parse(descriptor);
    auto m = km4::ingest::MappingSpec::parse(mapping);
    km4::Iri ctx = ws->ws->pipeline().register_dataset(d, m);
    if (out_context) *out_context = dup(ctx.str());
  });
}

km4_status km4_dataset_list(km4_workspace* ws, char** out_json) {
  return guard([&] {
    require(ws, "ws");
    require(out_json, "out_json");
    json arr = json::array();
    for (const auto& d : ws->ws->pipeline().datasets()) {
      json j{{"id", d.id},
             {"status", std::string(km4::ingest::to_string(d.status))},
             {"format", std::string(km4::ingest::to_string(d.original_format))},
             {"processType", std::string(km4::ingest::to_string(d.process_type))},
             {"macroclass", std::string(km4::schema::to_string(d.macroclass))},
             {"context", km4::ingest::dataset_context_iri(d.id)}};
      j["lastUpdate"] = d.last_update ? json(km4::format_datetime(*d.last_update)) : json(nullptr);
      arr.push_back(std::move(j));
    }
    *out_json = dup(arr.dump(2));
  });
}

km4_status km4_ingest_file(km4_workspace* ws, const char* dataset_id, const char* path, char** out_json) {
  return guard([&] {
    require(ws, "ws");
    require(dataset_id, "dataset_id");
    require(path, "path");
    auto report = ws->ws->pipeline().process_file(dataset_id, path, km4::now_utc());
    if (out_json) *out_json = dup(report_json(report).dump(2));
  });
}

km4_status km4_schedule_run(km4_workspace* ws, const char* until, char** out_json) {
  return guard([&] {
    require(ws, "ws");
    require(until, "until");
    km4::DateTime limit = km4::parse_datetime(until);
    ws->ws->schedule_registered();
    auto jobs = ws->ws->scheduler().run_until(limit);
    ws->ws->save_schedule();
    json arr = json::array();
    for (const auto& j : jobs) {
      json files = json::array();
      for (const auto& f : j.files) files.push_back(report_json(f));
      arr.push_back(json{{"dataset", j.dataset_id},
                         {"runAt", km4::format_datetime(j.run_at)},
                         {"ok", j.ok},
                         {"deferred", j.deferred},
                         {"error", j.error},
                         {"files", files}});
    }
    if (out_json) *out_json = dup(arr.dump(2));
  });
}

km4_status km4_feed_post(km4_workspace* ws, const char* type, const char* dataset_id, const char* payload,
                         char** out_json) {
  return guard([&] {
    require(ws, "ws");
    require(type, "type");
    require(payload, "payload");
    auto t = km4::realtime::payload_type_from_string(type);
    if (!t) km4::throw_error(km4::ErrorCode::kInvalidArgument, std::string("unknown payload type: ") + type);
    auto payloads = km4::realtime::parse_payloads(payload, *t);
    std::string id = dataset_id ? dataset_id : std::string(type) + "-feed";
    auto report = ws->ws->post_feed(id, payloads, km4::now_utc());
    if (out_json) *out_json = dup(report_json(report).dump(2));
  });
}

km4_status km4_store_stats(km4_workspace* ws, char** out_tsv) {
  return guard([&] {
    require(ws, "ws");
    require(out_tsv, "out_tsv");
    *out_tsv = dup(ws->ws->store().store_stats().to_tsv());
  });
}

km4_status km4_store_export(km4_workspace* ws, const char* context, char** out_nquads) {
  return guard([&] {
    require(ws, "ws");
    require(out_nquads, "out_nquads");
    std::optional<km4::Iri> ctx;
    if (context) ctx = km4::Iri(context);
    *out_nquads = dup(ws->ws->store().export_nquads(ctx));
  });
}

km4_status km4_store_compact(km4_workspace* ws, const char* window, const char* now, const char* archive,
                             char** out_json) {
  return guard([&] {
    require(ws, "ws");
    require(window, "window");
    require(archive, "archive");
    km4::DateTime at = now ? km4::parse_datetime(now) : km4::now_utc();
    auto r = ws->ws->store().compact(km4::parse_duration(window), at, km4::store::AggregationSpec::avm_delay(),
                                     archive);
    json j{{"windowStart", km4::format_datetime(r.window_start)},
           {"windowEnd", km4::format_datetime(r.window_end)},
           {"droppedQuads", r.dropped_quad_count},
           {"aggregateQuads", r.aggregate_quad_count},
           {"aggregateEntities", r.aggregate_entity_count},
           {"archive", r.archive_path}};
    if (out_json) *out_json = dup(j.dump(2));
  });
}

km4_status km4_normalize(const char* address, const char* municipality, const char* qualifiers, int as_json,
                         char** out) {
  return guard([&] {
    require(address, "address");
    require(out, "out");
    auto table = qualifiers ? km4::address::QualifierTable::load(qualifiers) : km4::address::QualifierTable::seed();
    km4::address::RawAddress raw = km4::address::split_address(address);
    if (municipality) raw.municipality = municipality;
    auto n = km4::address::normalize(raw, table);
    if (!as_json) {
      std::ostringstream os;
      os << km4::address::describe(n);
      if (raw.cap) os << "cap: " << *raw.cap << '\n';
      *out = dup(os.str());
      return;
    }
    json civics = json::array();
    for (const auto& c : n.civics) {
      json cj{{"color", std::string(km4::address::to_string(c.color))}, {"suffix", c.suffix}, {"flagged", c.flagged}};
      cj["value"] = c.value ? json(*c.value) : json(nullptr);
      civics.push_back(std::move(cj));
    }
    json j{{"raw", {{"street", raw.street}, {"civic", raw.civic}, {"municipality", raw.municipality}}},
           {"street", n.street()},
           {"qualifier", n.qualifier},
           {"nameTokens", n.name_tokens},
           {"lastWordKey", n.last_word_key},
           {"municipality", n.municipality},
           {"civics", civics},
           {"flags", n.flags}};
    j["cap"] = raw.cap ? json(*raw.cap) : json(nullptr);
    *out = dup(j.dump(2));
  });
}

km4_status km4_reconcile(km4_workspace* ws, const char* method, const char* services, const char* catalog, int apply,
                         char** out_links, char** out_summary) {
  return guard([&] {
    require(method, "method");
    require(services, "services");
    if (!catalog || apply) require(ws, "ws");
    auto m = km4::reconcile::method_from_string(method);
    if (!m || *m == km4::reconcile::Method::kManual) {
      km4::throw_error(km4::ErrorCode::kInvalidArgument, std::string("unknown method: ") + method);
    }
    auto table = ws ? ws->ws->qualifiers() : km4::address::QualifierTable::seed();
    auto cat = catalog ? km4::reconcile::ToponymCatalog::load(catalog, table) : ws->ws->catalog();
    auto svc = km4::reconcile::load_services(services);
    km4::reconcile::MethodConfig cfg;
    if (!km4::reconcile::is_exact(*m)) cfg.metric = *m;
    auto result = km4::reconcile::reconcile_corpus(svc, cat, *m, cfg);
    size_t inserted = 0;
    if (apply) {
      for (const auto& l : result.links) inserted += km4::reconcile::apply_decision(l, ws->ws->store(), cat).size();
    }
    const auto& s = result.summary;
    json j{{"method", std::string(km4::reconcile::to_string(*m))},
           {"services", s.services},
           {"links", result.links.size()},
           {"numberLevel", s.number_level},
           {"streetLevel", s.street_level},
           {"autoAccepted", s.auto_accepted},
           {"review", s.review},
           {"noMatch", s.no_match},
           {"unresolvedWithCoordinates", s.unresolved_with_coordinates},
           {"quadsInserted", inserted}};
    if (out_links) *out_links = dup(km4::reconcile::serialize_links(result.links));
    if (out_summary) *out_summary = dup(j.dump(2));
  });
}

km4_status km4_eval(const char* gold, const char* links, char** out_json) {
  return guard([&] {
    require(gold, "gold");
    require(links, "links");
    require(out_json, "out_json");
    auto g = km4::eval::GoldAlignment::load(gold);
    auto l = km4::reconcile::parse_links(km4::read_file(links));
    *out_json = dup(metrics_json(km4::eval::score(l, g)).dump(2));
  });
}

km4_status km4_corpus_generate(const char* spec, const char* out_dir) {
  return guard([&] {
    require(out_dir, "out_dir");
    auto s = spec ? km4::eval::CorpusSpec::parse(spec) : km4::eval::CorpusSpec::defaults();
    auto c = km4::eval::generate_corpus(s);
    std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    km4::write_file((dir / "catalog.tsv").string(), c.catalog.serialize());
    km4::write_file((dir / "services.tsv").string(), km4::reconcile::serialize_services(c.services));
    km4::write_file((dir / "gold.tsv").string(), c.gold.serialize());
  });
}

km4_status km4_bench(const char* spec, const char* methods, char** out_tsv, char** out_report) {
  return guard([&] {
    require(out_tsv, "out_tsv");
    auto t0 = std::chrono::steady_clock::now();
    auto s = spec ? km4::eval::CorpusSpec::parse(spec) : km4::eval::CorpusSpec::defaults();
    auto c = km4::eval::generate_corpus(s);
    auto rows = km4::eval::compare_methods(c.services, c.catalog, c.gold, method_list(methods));
    double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    *out_tsv = dup(km4::eval::comparison_tsv(rows));
    if (out_report) {
      json arr = json::array();
      for (const auto& r : rows) {
        json j = metrics_json(r.metrics);
        j["method"] = r.label;
        j["seconds"] = r.seconds;
        arr.push_back(std::move(j));
      }
      *out_report = dup(json{{"rows", arr}, {"services", c.services.size()}, {"gold", c.gold.entries.size()},
                             {"seconds", total}}
                            .dump(2));
    }
  });
}

km4_status km4_server_start(km4_workspace* ws, const char* host, int port, km4_server** out, int* bound_port) {
  return guard([&] {
    require(ws, "ws");
    require(out, "out");
    if (port < 0 || port > 65535) km4::throw_error(km4::ErrorCode::kInvalidArgument, "port out of range");
    auto s = std::make_unique<km4_server>();
    s->service = std::make_unique<km4::api::Service>(*ws->ws);
    s->http = std::make_unique<km4::api::HttpServer>(*s->service);
    int p = s->http->bind(host ? host : "127.0.0.1", port);
    if (p < 0) km4::throw_error(km4::ErrorCode::kIo, "cannot bind port " + std::to_string(port));
    km4::api::HttpServer* http = s->http.get();
    s->thread = std::thread([http] { http->listen_after_bind(); });
    http->wait_until_ready();
    if (bound_port) *bound_port = p;
    *out = s.release();
  });
}

void km4_server_wait(km4_server* server) {
  if (server && server->thread.joinable()) server->thread.join();
}

void km4_server_stop(km4_server* server) {
  if (server) server->http->stop();
}

void km4_server_free(km4_server* server) {
  if (!server) return;
  server->http->stop();
  if (server->thread.joinable()) server->thread.join();
  delete server;
}

}  // extern "C"

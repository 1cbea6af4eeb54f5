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

// Command-line front end. Talks to the library through the C API only.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "km4/km4.h"

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

class Owned {
 public:
  Owned() = default;
  ~Owned() { km4_string_free(p_); }
  Owned(const Owned&) = delete;
  Owned& operator=(const Owned&) = delete;
  char** out() { return &p_; }
  std::string str() const { return p_ ? p_ : ""; }

 private:
  char* p_ = nullptr;
};

struct Failure {
  km4_status status;
  std::string message;
};

void check(km4_status s) {
  if (s != KM4_OK) throw Failure{s, km4_last_error()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{KM4_ERR_IO, "cannot read " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Failure{KM4_ERR_IO, "cannot write " + path};
  out << text;
  if (!out) throw Failure{KM4_ERR_IO, "cannot write " + path};
}

class WorkspaceHandle {
 public:
  explicit WorkspaceHandle(const std::string& dir) { check(km4_workspace_open(dir.c_str(), &ws_)); }
  ~WorkspaceHandle() { km4_workspace_close(ws_); }
  WorkspaceHandle(const WorkspaceHandle&) = delete;
  WorkspaceHandle& operator=(const WorkspaceHandle&) = delete;
  km4_workspace* get() const { return ws_; }

 private:
  km4_workspace* ws_ = nullptr;
};

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"km4: smart-city knowledge graph toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", km4_version());
  std::string workspace = std::getenv("KM4_WORKSPACE") ? std::getenv("KM4_WORKSPACE") : "km4-data";
  app.add_option("-w,--workspace", workspace, "Workspace directory (env KM4_WORKSPACE)");

  auto* schema = app.add_subcommand("schema", "Built-in schema");
  schema->require_subcommand(1);
  auto* schema_dump = schema->add_subcommand("dump", "List classes and constraints");

  // dataset
  auto* dataset = app.add_subcommand("dataset", "Dataset registry");
  dataset->require_subcommand(1);
  std::string descriptor_file, mapping_file;
  auto* ds_register = dataset->add_subcommand("register", "Register a dataset descriptor and mapping");
  ds_register->add_option("--descriptor", descriptor_file, "Descriptor file (key=value)")->required();
  ds_register->add_option("--mapping", mapping_file, "Mapping file")->required();
  auto* ds_list = dataset->add_subcommand("list", "List registered datasets");

  // ingest
  std::string dataset_id, input_file;
  auto* ingest = app.add_subcommand("ingest", "Run the ingestion pipeline on one file");
  ingest->add_option("--dataset", dataset_id, "Dataset id")->required();
  ingest->add_option("--file", input_file, "Source file")->required()->check(CLI::ExistingFile);

  // schedule
  std::string until;
  auto* schedule = app.add_subcommand("schedule", "Ingestion scheduler");
  schedule->require_subcommand(1);
  auto* sched_run = schedule->add_subcommand("run", "Run due jobs in simulated time");
  sched_run->add_option("--until", until, "Date-time to run up to")->required();

  // feed
  std::string feed_type, feed_dataset;
  auto* feed = app.add_subcommand("feed", "Real-time feeds");
  feed->require_subcommand(1);
  auto* feed_post = feed->add_subcommand("post", "Post payloads of one type");
  feed_post->add_option("--type", feed_type, "Payload type")
      ->required()
      ->check(CLI::IsMember({"parking", "avm", "weather", "observation"}));
  feed_post->add_option("--file", input_file, "JSON payload file")->required()->check(CLI::ExistingFile);
  feed_post->add_option("--dataset", feed_dataset, "Feed dataset id (default <type>-feed)");

  // normalize
  std::string address, municipality, qualifiers;
  bool as_json = false;
  auto* normalize = app.add_subcommand("normalize", "Normalize one address");
  normalize->add_option("--address", address, "Free-text address")->required();
  normalize->add_option("--municipality", municipality, "Municipality, overriding the text");
  normalize->add_option("--qualifiers", qualifiers, "Extra qualifier table")->check(CLI::ExistingFile);
  normalize->add_flag("--json", as_json, "Print JSON");

  // reconcile
  std::string method, services, links_out, catalog;
  bool apply = false;
  auto* reconcile = app.add_subcommand("reconcile", "Link services to the toponym catalog");
  reconcile->add_option("--method", method, "Method")
      ->required()
      ->check(CLI::IsMember({"exact", "levenshtein", "dice", "jaccard", "kb-levenshtein"}));
  reconcile->add_option("--services", services, "Services file")->required()->check(CLI::ExistingFile);
  reconcile->add_option("--out", links_out, "Links output file")->required();
  reconcile->add_option("--catalog", catalog, "Catalog file (default: the workspace catalog)")
      ->check(CLI::ExistingFile);
  reconcile->add_flag("--apply", apply, "Also write the links into the workspace store");

  // eval
  std::string gold, links_in;
  auto* eval = app.add_subcommand("eval", "Score links against a gold alignment");
  eval->add_option("--gold", gold, "Gold file")->required()->check(CLI::ExistingFile);
  eval->add_option("--links", links_in, "Links file")->required()->check(CLI::ExistingFile);

  // bench
  std::string spec_file, methods = "all", table_out, report_out;
  auto* bench = app.add_subcommand("bench", "Compare methods on a synthetic corpus");
  bench->add_option("--spec", spec_file, "Corpus spec (key=value); defaults when omitted")
      ->check(CLI::ExistingFile);
  bench->add_option("--methods", methods, "all, or a comma-separated list");
  bench->add_option("--out", table_out, "TSV table output (default stdout)");
  bench->add_option("--report", report_out, "JSON report with timings");

  // corpus
  std::string out_dir;
  auto* corpus = app.add_subcommand("corpus", "Write a synthetic catalog, services and gold");
  corpus->add_option("--spec", spec_file, "Corpus spec (key=value)")->check(CLI::ExistingFile);
  corpus->add_option("--out-dir", out_dir, "Output directory")->required();

  // store
  std::string context, out_file, window, now, archive;
  auto* store = app.add_subcommand("store", "Quad store maintenance");
  store->require_subcommand(1);
  auto* store_stats = store->add_subcommand("stats", "Quads per macroclass and kind");
  auto* store_export = store->add_subcommand("export", "Export N-Quads");
  store_export->add_option("--context", context, "Only this context");
  store_export->add_option("--out", out_file, "Output file (default stdout)");
  auto* store_compact = store->add_subcommand("compact", "Archive and aggregate old real-time records");
  store_compact->add_option("--window", window, "Window kept live, e.g. 30d")->required();
  store_compact->add_option("--archive", archive, "Archive directory or file")->required();
  store_compact->add_option("--now", now, "Reference time (default now)");

  // serve
  int port = 8080;
  std::string host = "127.0.0.1";
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  serve->add_option("--port", port, "Port (0 picks one)")->check(CLI::Range(0, 65535));
  serve->add_option("--store", workspace, "Workspace directory to serve");
  serve->add_option("--host", host, "Bind address");

  CLI11_PARSE(app, argc, argv);

  try {
    if (schema_dump->parsed()) {
      Owned out;
      check(km4_schema_dump(out.out()));
      std::cout << out.str();
    } else if (ds_register->parsed()) {
      WorkspaceHandle ws(workspace);
      Owned ctx;
      check(km4_dataset_register(ws.get(), slurp(descriptor_file).c_str(), slurp(mapping_file).c_str(), ctx.out()));
      std::cout << ctx.str() << '\n';
    } else if (ds_list->parsed()) {
      WorkspaceHandle ws(workspace);
      Owned out;
      check(km4_dataset_list(ws.get(), out.out()));
      std::cout << out.str() << '\n';
    } else if (ingest->parsed()) {
      WorkspaceHandle ws(workspace);
      Owned out;
      check(km4_ingest_file(ws.get(), dataset_id.c_str(), input_file.c_str(), out.out()));
      std::cout << out.str() << '\n';
    } else if (sched_run->parsed()) {
      WorkspaceHandle ws(workspace);
      Owned out;
      check(km4_schedule_run(ws.get(), until.c_str(), out.out()));
      std::cout << out.str() << '\n';
    } else if (feed_post->parsed()) {
      WorkspaceHandle ws(workspace);
      Owned out;
      check(km4_feed_post(ws.get(), feed_type.c_str(), opt(feed_dataset), slurp(input_file).c_str(), out.out()));
      std::cout << out.str() << '\n';
    } else if (normalize->parsed()) {
      Owned out;
      check(km4_normalize(address.c_str(), opt(municipality), opt(qualifiers), as_json ? 1 : 0, out.out()));
      std::cout << out.str();
      if (as_json) std::cout << '\n';
    } else if (reconcile->parsed()) {
      std::optional<WorkspaceHandle> ws;
      if (catalog.empty() || apply) ws.emplace(workspace);
      Owned links, summary;
      check(km4_reconcile(ws ? ws->get() : nullptr, method.c_str(), services.c_str(), opt(catalog), apply ? 1 : 0,
                          links.out(), summary.out()));
      spit(links_out, links.str());
      std::cout << summary.str() << '\n';
    } else if (eval->parsed()) {
      Owned out;
      check(km4_eval(gold.c_str(), links_in.c_str(), out.out()));
      std::cout << out.str() << '\n';
    } else if (bench->parsed()) {
      std::string spec = spec_file.empty() ? "" : slurp(spec_file);
      Owned tsv, report;
      check(km4_bench(spec_file.empty() ? nullptr : spec.c_str(), methods.c_str(), tsv.out(), report.out()));
      if (table_out.empty()) {
        std::cout << tsv.str();
      } else {
        spit(table_out, tsv.str());
      }
      if (!report_out.empty()) spit(report_out, report.str() + "\n");
    } else if (corpus->parsed()) {
      std::string spec = spec_file.empty() ? "" : slurp(spec_file);
      check(km4_corpus_generate(spec_file.empty() ? nullptr : spec.c_str(), out_dir.c_str()));
      std::cout << "wrote catalog.tsv, services.tsv and gold.tsv to " << out_dir << '\n';
    } else if (store_stats->parsed()) {
      WorkspaceHandle ws(workspace);
      Owned out;
      check(km4_store_stats(ws.get(), out.out()));
      std::cout << out.str();
    } else if (store_export->parsed()) {
      WorkspaceHandle ws(workspace);
      Owned out;
      check(km4_store_export(ws.get(), opt(context), out.out()));
      if (out_file.empty()) {
        std::cout << out.str();
      } else {
        spit(out_file, out.str());
      }
    } else if (store_compact->parsed()) {
      WorkspaceHandle ws(workspace);
      Owned out;
      check(km4_store_compact(ws.get(), window.c_str(), opt(now), archive.c_str(), out.out()));
      std::cout << out.str() << '\n';
    } else if (serve->parsed()) {
      WorkspaceHandle ws(workspace);
      km4_server* server = nullptr;
      int bound = 0;
      check(km4_server_start(ws.get(), host.c_str(), port, &server, &bound));
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "listening on http://" << host << ':' << bound << std::endl;
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      km4_server_free(server);
    }
  } catch (const Failure& f) {
    std::cerr << "km4: " << km4_status_name(f.status) << ": " << f.message << '\n';
    return 1;
  }
  return 0;
}

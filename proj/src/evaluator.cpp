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

#include "km4/evaluator.hpp"

#include <chrono>
#include <random>
#include <set>
#include <sstream>

#include "km4/common.hpp"

namespace km4::eval {

using reconcile::Level;
using reconcile::MatchCandidate;

GoldAlignment GoldAlignment::parse(std::string_view text) {
  GoldAlignment g;
  size_t lineno = 0;
  for (const auto& raw : split(text, '\n')) {
    ++lineno;
    std::string line = raw;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    auto where = "gold line " + std::to_string(lineno) + ": ";
    if (cols.size() != 4) throw_error(ErrorCode::kParse, where + "expected 4 columns");
    GoldEntry e;
    try {
      e.road = Iri(cols[1]);
      if (cols[2] != "-") e.street_number = Iri(cols[2]);
      (void)Iri(cols[0]);
    } catch (const Error& err) {
      throw_error(ErrorCode::kParse, where + err.what());
    }
    auto level = reconcile::level_from_string(cols[3]);
    if (!level) throw_error(ErrorCode::kParse, where + "unknown level " + cols[3]);
    if (*level == Level::kNumber && !e.street_number) {
      throw_error(ErrorCode::kParse, where + "number level without street number");
    }
    e.level = *level;
    if (!g.entries.emplace(cols[0], std::move(e)).second) {
      throw_error(ErrorCode::kParse, where + "duplicate service " + cols[0]);
    }
  }
  return g;
}

GoldAlignment GoldAlignment::load(const std::string& path) { return parse(read_file(path)); }

std::string GoldAlignment::serialize() const {
  std::ostringstream out;
  for (const auto& [s, e] : entries) {
    out << s << '\t' << e.road.str() << '\t' << (e.street_number ? e.street_number->str() : "-") << '\t'
        << reconcile::to_string(e.level) << '\n';
  }
  return out.str();
}

const GoldEntry* GoldAlignment::find(const Iri& service) const {
  auto it = entries.find(service.str());
  return it == entries.end() ? nullptr : &it->second;
}

double f1_score(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

bool is_true_positive(const MatchCandidate& link, const GoldAlignment& gold) {
  const GoldEntry* g = gold.find(link.service);
  if (!g || g->road != link.road) return false;
  if (link.level == Level::kNumber) return g->street_number && link.street_number == g->street_number;
  return true;
}

MetricsReport score(const std::vector<MatchCandidate>& predicted, const GoldAlignment& gold) {
  MetricsReport m;
  using Key = std::tuple<std::string, std::string, std::string, int>;
  std::set<Key> seen;
  std::set<std::string> hit;
  uint64_t predictions = 0;
  for (const auto& l : predicted) {
    Key k{l.service.str(), l.road.str(), l.street_number ? l.street_number->str() : "",
          static_cast<int>(l.level)};
    if (!seen.insert(k).second) continue;
    ++predictions;
    if (is_true_positive(l, gold)) {
      if (hit.insert(l.service.str()).second) ++m.by_level[l.level].tp;
    } else {
      ++m.counts.fp;
      ++m.by_level[l.level].fp;
    }
  }
  m.counts.tp = hit.size();
  for (const auto& [s, e] : gold.entries) {
    if (!hit.count(s)) ++m.by_level[e.level].fn;
  }
  m.counts.fn = gold.entries.size() - m.counts.tp;
  m.no_predictions = predictions == 0;
  // Precision over distinct links: duplicate correct links of one service
  // beyond the first count neither way.
  uint64_t judged = m.counts.tp + m.counts.fp;
  m.precision = judged == 0 ? 0.0 : static_cast<double>(m.counts.tp) / static_cast<double>(judged);
  m.recall = gold.entries.empty() ? 0.0
                                  : static_cast<double>(m.counts.tp) / static_cast<double>(gold.entries.size());
  m.f1 = f1_score(m.precision, m.recall);
  return m;
}

std::vector<MatchCandidate> simulate_operator(const std::vector<reconcile::ReviewItem>& queue,
                                              const GoldAlignment& gold, const ManualConfig& cfg) {
  if (cfg.operator_accuracy < 0 || cfg.operator_accuracy > 1) {
    throw_error(ErrorCode::kInvalidArgument, "operator accuracy must be in [0,1]");
  }
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<MatchCandidate> out;
  for (const auto& item : queue) {
    const GoldEntry* g = gold.find(item.service);
    std::optional<size_t> right;
    std::optional<size_t> wrong;
    for (size_t i = 0; i < item.candidates.size(); ++i) {
      bool correct = g && item.candidates[i].road == g->road;
      if (correct && !right) right = i;
      if (!correct && !wrong) wrong = i;
    }
    bool accurate = coin(rng) < cfg.operator_accuracy;
    std::optional<size_t> pick = accurate ? right : wrong;
    if (!pick) continue;  // reject
    MatchCandidate c = item.candidates[*pick];
    c.method = reconcile::Method::kManual;
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<std::string> all_methods() {
  return {"exact", "levenshtein", "dice", "jaccard", "kbLevenshtein", "manual"};
}

std::vector<ComparisonRow> compare_methods(const std::vector<reconcile::TargetService>& services,
                                           const reconcile::ToponymCatalog& catalog, const GoldAlignment& gold,
                                           const std::vector<std::string>& methods,
                                           const reconcile::MethodConfig& cfg, const ManualConfig& manual) {
  std::vector<ComparisonRow> rows;
  std::optional<reconcile::CorpusResult> exact_run;
  auto run_exact = [&]() -> const reconcile::CorpusResult& {
    if (!exact_run) exact_run = reconcile::reconcile_corpus(services, catalog, reconcile::Method::kExact1, cfg);
    return *exact_run;
  };
  for (const auto& name : methods) {
    auto t0 = std::chrono::steady_clock::now();
    ComparisonRow row;
    if (name == "manual") {
      const auto& base = run_exact();
      auto links = base.links;
      auto decided = simulate_operator(base.review_queue, gold, manual);
      links.insert(links.end(), decided.begin(), decided.end());
      row.label = "exact+manual";
      row.metrics = score(links, gold);
      row.summary = base.summary;
    } else {
      auto method = reconcile::method_from_string(name);
      if (!method || *method == reconcile::Method::kManual) {
        throw_error(ErrorCode::kInvalidArgument, "unknown method: " + name);
      }
      const reconcile::CorpusResult* result;
      reconcile::CorpusResult own;
      if (reconcile::is_exact(*method)) {
        result = &run_exact();
        row.label = "exact";
      } else {
        own = reconcile::reconcile_corpus(services, catalog, *method, cfg);
        result = &own;
        row.label = std::string(reconcile::to_string(*method));
      }
      row.metrics = score(result->links, gold);
      row.summary = result->summary;
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string comparison_tsv(const std::vector<ComparisonRow>& rows) {
  std::ostringstream out;
  out << "Method\tP\tR\tF1\tTP\tFP\tFN\n";
  char buf[64];
  for (const auto& r : rows) {
    out << r.label;
    for (double v : {r.metrics.precision, r.metrics.recall, r.metrics.f1}) {
      std::snprintf(buf, sizeof(buf), "\t%.3f", v);
      out << buf;
    }
    out << '\t' << r.metrics.counts.tp << '\t' << r.metrics.counts.fp << '\t' << r.metrics.counts.fn << '\n';
  }
  return out.str();
}

}  // namespace km4::eval

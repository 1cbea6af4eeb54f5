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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "km4/reconciler.hpp"

namespace km4::eval {

struct GoldEntry {
  Iri road;
  std::optional<Iri> street_number;
  reconcile::Level level = reconcile::Level::kStreet;

  friend bool operator==(const GoldEntry&, const GoldEntry&) = default;
};

struct GoldAlignment {
  std::map<std::string, GoldEntry> entries;  // keyed by service IRI

  /// `serviceIri<TAB>roadIri<TAB>streetNumberIri|-<TAB>level` per line.
  static GoldAlignment parse(std::string_view text);
  static GoldAlignment load(const std::string& path);
  std::string serialize() const;
  const GoldEntry* find(const Iri& service) const;
};

struct ConfusionCounts {
  uint64_t tp = 0;
  uint64_t fp = 0;
  uint64_t fn = 0;

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct MetricsReport {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  ConfusionCounts counts;
  /// Set when nothing was predicted; precision is then reported as 0.
  bool no_predictions = false;
  /// tp/fp by predicted level, fn by gold level.
  std::map<reconcile::Level, ConfusionCounts> by_level;
};

/// Harmonic mean; 0 when p + r is 0.
double f1_score(double precision, double recall);

bool is_true_positive(const reconcile::MatchCandidate& link, const GoldAlignment& gold);

/// Identical links are counted once. tp counts gold entries hit by at least
/// one correct link, so tp + fn equals the gold size.
MetricsReport score(const std::vector<reconcile::MatchCandidate>& predicted, const GoldAlignment& gold);

struct ManualConfig {
  double operator_accuracy = 0.95;
  uint64_t seed = 42;
};

/// Resolves a review queue against the gold alignment with a simulated
/// operator: right with probability `operator_accuracy`, otherwise choosing
/// a wrong candidate (or rejecting when none exists). Returns the accepted
/// links.
std::vector<reconcile::MatchCandidate> simulate_operator(const std::vector<reconcile::ReviewItem>& queue,
                                                         const GoldAlignment& gold, const ManualConfig& cfg);

struct ComparisonRow {
  std::string label;
  MetricsReport metrics;
  reconcile::Summary summary;
  double seconds = 0;
};

/// `methods` holds method names plus "manual" for the exact run completed
/// by the simulated operator. Rows come back in the order given.
std::vector<ComparisonRow> compare_methods(const std::vector<reconcile::TargetService>& services,
                                           const reconcile::ToponymCatalog& catalog, const GoldAlignment& gold,
                                           const std::vector<std::string>& methods,
                                           const reconcile::MethodConfig& cfg = {}, const ManualConfig& manual = {});

/// Method, P, R, F1, TP, FP, FN.
std::string comparison_tsv(const std::vector<ComparisonRow>& rows);

std::vector<std::string> all_methods();

}  // namespace km4::eval

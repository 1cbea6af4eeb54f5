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
#include <string>
#include <vector>

#include "km4/evaluator.hpp"
#include "km4/reconciler.hpp"

namespace km4::eval {

/// Error types injected by the generator.
inline constexpr const char* kErrorTypes[] = {
    "typo",          "missingCivic", "aliasMunicipality", "noiseChars", "reorderedName",
    "malformedCivic", "redNumber",   "romanNumeral",      "qualifierVariant",
};

struct CorpusSpec {
  size_t n_services = 5000;
  size_t n_roads = 1500;
  size_t n_municipalities = 10;
  /// Independent per-service probabilities, applied where the error type
  /// fits the service (a red civic, a Roman numeral in the name, ...).
  std::map<std::string, double> error_rates = default_error_rates();
  double clean_rate = 0.15;
  double unreconcilable_rate = 0.0575;
  /// Corrupted services whose civic is missing from the catalog.
  double uncatalogued_civic_rate = 0.10;
  double coordinate_rate = 0.03;
  uint64_t seed = 42;

  static std::map<std::string, double> default_error_rates();
  static CorpusSpec defaults() { return {}; }
  /// `key=value` lines; error rates as `rate.<type>=<r>`.
  static CorpusSpec parse(std::string_view text);
  std::string serialize() const;
  /// Throws Error(kInvalidArgument) on out-of-range or incoherent rates.
  void validate() const;
};

struct Corpus {
  std::vector<reconcile::TargetService> services;
  reconcile::ToponymCatalog catalog;
  GoldAlignment gold;
  /// Catalog form of every reconcilable service before corruption.
  std::map<std::string, address::RawAddress> original;
  /// Error types applied to each service.
  std::map<std::string, std::vector<std::string>> applied;
  std::vector<std::string> clean;
  std::vector<std::string> unreconcilable;
};

/// Deterministic per seed.
Corpus generate_corpus(const CorpusSpec& spec);

}  // namespace km4::eval

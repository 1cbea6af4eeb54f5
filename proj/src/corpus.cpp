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

#include "km4/corpus.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "km4/common.hpp"
#include "km4/similarity.hpp"
#include "km4/vocab.hpp"

namespace km4::eval {

namespace {

using reconcile::Level;

struct Municipality {
  const char* name;
  const char* alias;
  double lat;
  double lon;
};

constexpr Municipality kMunicipalities[] = {
    {"FIRENZE", "FLORENCE", 43.7696, 11.2558},
    {"PRATO", "CITTA DI PRATO", 43.8777, 11.1022},
    {"PISTOIA", "CITTA DI PISTOIA", 43.9331, 10.9173},
    {"SIENA", "CITTA DI SIENA", 43.3188, 11.3308},
    {"AREZZO", "CITTA DI AREZZO", 43.4633, 11.8796},
    {"LUCCA", "CITTA DI LUCCA", 43.8429, 10.5027},
    {"PISA", "CITTA DI PISA", 43.7228, 10.4017},
    {"LIVORNO", "LEGHORN", 43.5485, 10.3106},
    {"GROSSETO", "CITTA DI GROSSETO", 42.7635, 11.1124},
    {"EMPOLI", "CITTA DI EMPOLI", 43.7190, 10.9460},
    {"VICCHIO", "VICCHIO DEL MUGELLO", 43.9329, 11.4636},
    {"BARBERINO", "BARBERINO DI MUGELLO", 43.9996, 11.2369},
    {"SAN CASCIANO", "SAN CASCIANO IN VAL DI PESA", 43.6570, 11.1855},
    {"FIGLINE", "FIGLINE E INCISA VALDARNO", 43.6197, 11.4694},
};

constexpr const char* kFirstNames[] = {
    "FRANCESCO", "GIUSEPPE", "ANTONIO", "GIOVANNI", "LUIGI", "CARLO",  "PIETRO",   "MARIO",
    "LORENZO",   "ALESSANDRO", "GIACOMO", "ANDREA", "MATTEO", "MARCO", "ROBERTO", "LUCIA",
    "MARIA",     "CATERINA", "ELENA",  "BEATRICE", "GIULIA", "DANTE", "GUIDO",    "CESARE",
};

constexpr const char* kRomans[] = {"XXIII", "XII", "XV", "VIII", "IX", "XI", "VI", "XIV", "XVI", "IV", "XX", "XIII",
                                   "VII", "XXI"};

struct Qualifier {
  const char* canonical;
  int weight;
  std::vector<const char*> variants;
};

const std::vector<Qualifier>& qualifiers() {
  static const std::vector<Qualifier> q = {
      {"VIA", 60, {"V."}},
      {"PIAZZA", 12, {"P.ZZA", "P.ZA", "PZA"}},
      {"VIALE", 8, {"V.LE", "VLE"}},
      {"CORSO", 5, {"C.SO", "CSO"}},
      {"LARGO", 5, {"L.GO", "LGO"}},
      {"BORGO", 5, {"B.GO", "BGO"}},
      {"VICOLO", 5, {"V.LO", "VIC."}},
  };
  return q;
}

int roman_to_int(std::string_view r) {
  auto val = [](char c) {
    switch (c) {
      case 'I': return 1;
      case 'V': return 5;
      case 'X': return 10;
      case 'L': return 50;
      case 'C': return 100;
      default: return 0;
    }
  };
  int total = 0;
  for (size_t i = 0; i < r.size(); ++i) {
    int v = val(r[i]);
    int next = i + 1 < r.size() ? val(r[i + 1]) : 0;
    total += v < next ? -v : v;
  }
  return total;
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}
  size_t pick(size_t n) { return static_cast<size_t>(gen_() % n); }
  bool chance(double p) { return static_cast<double>(gen_() >> 11) * 0x1.0p-53 < p; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[pick(i)]);
  }

 private:
  std::mt19937_64 gen_;
};

enum class RoadKind { kPerson, kPlain, kArticle, kRoman };

struct GenRoad {
  std::string iri;
  size_t muni = 0;
  RoadKind kind = RoadKind::kPlain;
  std::string qualifier;
  std::vector<std::string> name;  // tokens after the qualifier
  struct Civic {
    int value;
    bool red;
    std::string iri;
  };
  std::vector<Civic> civics;

  std::string street() const { return qualifier + " " + join(name, " "); }
};

std::string civic_text(int value, bool red) { return std::to_string(value) + (red ? "/R" : ""); }

/// Synthetic surname: consonant-vowel syllables with an Italian ending.
std::string make_word(Rng& rng) {
  static const char kCons[] = "BCDFGLMNPRSTVZ";
  static const char kVow[] = "AEIOU";
  static const char* kEnds[] = {"I", "O", "A", "INI", "ETTI", "ONI", "ELLI"};
  std::string w;
  size_t syll = 2 + rng.pick(2);
  for (size_t i = 0; i < syll; ++i) {
    w.push_back(kCons[rng.pick(sizeof(kCons) - 1)]);
    w.push_back(kVow[rng.pick(sizeof(kVow) - 1)]);
  }
  w.pop_back();  // the ending supplies the final vowel
  w += kEnds[rng.pick(std::size(kEnds))];
  return w;
}

/// Words far (>= 3 edits) from each other, from first names and from
/// Roman numerals.
std::vector<std::string> distinct_words(Rng& rng, size_t n, const address::QualifierTable& table) {
  std::vector<std::string> out;
  size_t attempts = 0;
  while (out.size() < n) {
    if (++attempts > n * 2000) throw_error(ErrorCode::kInternal, "cannot generate enough distinct road names");
    std::string w = make_word(rng);
    if (table.lookup(w) || table.is_qualifier(w) || address::is_roman_numeral(w)) continue;
    bool ok = std::none_of(std::begin(kFirstNames), std::end(kFirstNames),
                           [&](const char* f) { return similarity::levenshtein_distance(w, f) < 3; }) &&
              std::none_of(std::begin(kRomans), std::end(kRomans),
                           [&](const char* r) { return similarity::levenshtein_distance(w, r) < 3; }) &&
              std::none_of(out.begin(), out.end(),
                           [&](const std::string& o) { return similarity::levenshtein_distance(w, o) < 3; });
    if (ok) out.push_back(std::move(w));
  }
  return out;
}

std::string pick_qualifier(Rng& rng) {
  int total = 0;
  for (const auto& q : qualifiers()) total += q.weight;
  int r = static_cast<int>(rng.pick(static_cast<size_t>(total)));
  for (const auto& q : qualifiers()) {
    if (r < q.weight) return q.canonical;
    r -= q.weight;
  }
  return "VIA";
}

const Qualifier& qualifier_info(const std::string& canonical) {
  for (const auto& q : qualifiers()) {
    if (canonical == q.canonical) return q;
  }
  return qualifiers().front();
}

/// One edit on a letter of `w`, never the first one.
std::string typo(Rng& rng, const std::string& w) {
  static const char kLetters[] = "ABCDEFGHILMNOPRSTUVZ";
  for (;;) {
    std::string out = w;
    size_t pos = 1 + rng.pick(w.size() - 1);
    char c = kLetters[rng.pick(sizeof(kLetters) - 1)];
    switch (rng.pick(3)) {
      case 0: out[pos] = c; break;
      case 1: out.erase(pos, 1); break;
      default: out.insert(pos, 1, c); break;
    }
    if (out != w) return out;
  }
}

struct Draft {
  std::string street;
  std::string civic;
  std::string municipality;
};

}  // namespace

std::map<std::string, double> CorpusSpec::default_error_rates() {
  return {
      {"typo", 0.12},          {"missingCivic", 0.10},  {"aliasMunicipality", 0.05},
      {"noiseChars", 0.15},    {"reorderedName", 0.25}, {"malformedCivic", 0.10},
      {"redNumber", 0.50},     {"romanNumeral", 0.50},  {"qualifierVariant", 0.30},
  };
}

void CorpusSpec::validate() const {
  auto in_unit = [](double r) { return r >= 0 && r <= 1; };
  for (const auto& [k, r] : error_rates) {
    if (std::find_if(std::begin(kErrorTypes), std::end(kErrorTypes), [&](const char* t) { return k == t; }) ==
        std::end(kErrorTypes)) {
      throw_error(ErrorCode::kInvalidArgument, "unknown error type: " + k);
    }
    if (!in_unit(r)) throw_error(ErrorCode::kInvalidArgument, "error rate out of [0,1]: " + k);
  }
  for (double r : {clean_rate, unreconcilable_rate, uncatalogued_civic_rate, coordinate_rate}) {
    if (!in_unit(r)) throw_error(ErrorCode::kInvalidArgument, "rate out of [0,1]");
  }
  if (clean_rate + unreconcilable_rate > 1) {
    throw_error(ErrorCode::kInvalidArgument, "cleanRate + unreconcilableRate exceeds 1");
  }
  if (n_municipalities == 0 || n_municipalities > std::size(kMunicipalities)) {
    throw_error(ErrorCode::kInvalidArgument,
                "nMunicipalities must be in [1, " + std::to_string(std::size(kMunicipalities)) + "]");
  }
  if (n_roads < n_municipalities) throw_error(ErrorCode::kInvalidArgument, "nRoads below nMunicipalities");
}

CorpusSpec CorpusSpec::parse(std::string_view text) {
  CorpusSpec s = defaults();
  size_t lineno = 0;
  for (const auto& raw : split(text, '\n')) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    auto where = "corpus spec line " + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw_error(ErrorCode::kParse, where + "expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    try {
      size_t used = 0;
      auto as_size = [&] {
        auto v = std::stoull(value, &used);
        return static_cast<size_t>(v);
      };
      auto as_rate = [&] { return std::stod(value, &used); };
      if (key == "nServices") s.n_services = as_size();
      else if (key == "nRoads") s.n_roads = as_size();
      else if (key == "nMunicipalities") s.n_municipalities = as_size();
      else if (key == "cleanRate") s.clean_rate = as_rate();
      else if (key == "unreconcilableRate") s.unreconcilable_rate = as_rate();
      else if (key == "uncataloguedCivicRate") s.uncatalogued_civic_rate = as_rate();
      else if (key == "coordinateRate") s.coordinate_rate = as_rate();
      else if (key == "seed") s.seed = std::stoull(value, &used);
      else if (starts_with(key, "rate.")) s.error_rates[key.substr(5)] = as_rate();
      else throw_error(ErrorCode::kParse, where + "unknown key " + key);
      if (used != value.size()) throw_error(ErrorCode::kParse, where + "bad value for " + key);
    } catch (const std::logic_error&) {
      throw_error(ErrorCode::kParse, where + "bad value for " + key);
    }
  }
  s.validate();
  return s;
}

std::string CorpusSpec::serialize() const {
  std::ostringstream out;
  out << "nServices=" << n_services << '\n'
      << "nRoads=" << n_roads << '\n'
      << "nMunicipalities=" << n_municipalities << '\n'
      << "cleanRate=" << format_double(clean_rate) << '\n'
      << "unreconcilableRate=" << format_double(unreconcilable_rate) << '\n'
      << "uncataloguedCivicRate=" << format_double(uncatalogued_civic_rate) << '\n'
      << "coordinateRate=" << format_double(coordinate_rate) << '\n'
      << "seed=" << seed << '\n';
  for (const auto& [k, r] : error_rates) out << "rate." << k << '=' << format_double(r) << '\n';
  return out.str();
}

Corpus generate_corpus(const CorpusSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const auto table = address::QualifierTable::seed();
  const std::string base = std::string(vocab::kResourceBase) + "/corpus";
  auto rate = [&](const char* type) {
    auto it = spec.error_rates.find(type);
    return it == spec.error_rates.end() ? 0.0 : it->second;
  };

  const size_t n_clean = static_cast<size_t>(std::floor(spec.clean_rate * static_cast<double>(spec.n_services)));
  const size_t n_unrec =
      static_cast<size_t>(std::floor(spec.unreconcilable_rate * static_cast<double>(spec.n_services)));
  const size_t deleted_per_muni = (n_unrec + spec.n_municipalities - 1) / spec.n_municipalities + 2;

  // Roads: live ones go to the catalog, deleted ones only feed
  // unreconcilable services.
  std::vector<GenRoad> live;
  std::vector<std::vector<size_t>> live_by_muni(spec.n_municipalities);
  std::vector<std::vector<GenRoad>> deleted(spec.n_municipalities);
  for (size_t m = 0; m < spec.n_municipalities; ++m) {
    size_t n_live = spec.n_roads / spec.n_municipalities + (m < spec.n_roads % spec.n_municipalities ? 1 : 0);
    auto words = distinct_words(rng, n_live + deleted_per_muni, table);
    for (size_t i = 0; i < words.size(); ++i) {
      GenRoad r;
      r.muni = m;
      r.qualifier = pick_qualifier(rng);
      bool is_live = i < n_live;
      if (i == 0) {
        r.kind = RoadKind::kRoman;
        r.qualifier = "VIA";
        r.name = {"PAPA", words[i], kRomans[m % std::size(kRomans)]};
      } else {
        size_t k = rng.pick(100);
        if (k < 45) {
          r.kind = RoadKind::kPerson;
          r.name = {kFirstNames[rng.pick(std::size(kFirstNames))], words[i]};
        } else if (k < 75) {
          r.kind = RoadKind::kPlain;
          r.name = {words[i]};
        } else {
          static const char* kArticles[] = {"DEI", "DEL", "DELLA", "DEGLI"};
          r.kind = RoadKind::kArticle;
          r.name = {kArticles[rng.pick(std::size(kArticles))], words[i]};
        }
      }
      std::string tag = std::to_string(m) + "-" + std::to_string(i);
      r.iri = base + (is_live ? "/road/" : "/deleted-road/") + tag;
      // Civics: a run of black numbers, red ones on some roads.
      size_t n_black = 4 + rng.pick(12);
      std::set<int> used;
      while (used.size() < n_black) used.insert(1 + static_cast<int>(rng.pick(120)));
      for (int v : used) r.civics.push_back({v, false, r.iri + "/civic/" + std::to_string(v)});
      if (rng.chance(0.3)) {
        std::set<int> red;
        size_t n_red = 2 + rng.pick(6);
        while (red.size() < n_red) red.insert(1 + static_cast<int>(rng.pick(80)));
        for (int v : red) r.civics.push_back({v, true, r.iri + "/civic/" + std::to_string(v) + "-red"});
      }
      if (is_live) {
        live_by_muni[m].push_back(live.size());
        live.push_back(std::move(r));
      } else {
        deleted[m].push_back(std::move(r));
      }
    }
  }

  Corpus corpus;
  for (size_t m = 0; m < spec.n_municipalities; ++m) {
    corpus.catalog.add_alias(kMunicipalities[m].alias, kMunicipalities[m].name);
  }
  for (const auto& r : live) {
    std::string alternative;
    if (r.kind == RoadKind::kPerson && rng.chance(0.2)) {
      alternative = r.qualifier + " " + r.name[0].substr(0, 1) + ". " + r.name[1];
    }
    corpus.catalog.add_road(Iri(r.iri), kMunicipalities[r.muni].name, r.street(), alternative);
    for (const auto& c : r.civics) {
      corpus.catalog.add_number(Iri(r.iri), Iri(c.iri), civic_text(c.value, c.red), Iri(c.iri + "/entry"));
    }
  }

  // Service classes, shuffled over positions.
  enum class Kind { kClean, kUnreconcilable, kCorrupted };
  std::vector<Kind> kinds(spec.n_services, Kind::kCorrupted);
  std::fill_n(kinds.begin(), n_clean, Kind::kClean);
  std::fill_n(kinds.begin() + static_cast<std::ptrdiff_t>(n_clean), n_unrec, Kind::kUnreconcilable);
  rng.shuffle(kinds);

  std::vector<std::vector<size_t>> deleted_cursor(spec.n_municipalities);
  for (size_t i = 0; i < spec.n_services; ++i) {
    const Kind kind = kinds[i];
    const std::string iri = base + "/service/" + std::to_string(i + 1);
    const GenRoad* road;
    if (kind == Kind::kUnreconcilable) {
      size_t m = rng.pick(spec.n_municipalities);
      road = &deleted[m][rng.pick(deleted[m].size())];
    } else {
      size_t m = rng.pick(spec.n_municipalities);
      road = &live[live_by_muni[m][rng.pick(live_by_muni[m].size())]];
    }
    const Municipality& muni = kMunicipalities[road->muni];

    // Civic: a catalogued one, or for some corrupted services a number the
    // catalog does not list.
    const GenRoad::Civic* civic = &road->civics[rng.pick(road->civics.size())];
    int uncatalogued = 0;
    if (kind == Kind::kCorrupted && rng.chance(spec.uncatalogued_civic_rate)) {
      std::set<int> taken;
      for (const auto& c : road->civics) taken.insert(c.value);
      uncatalogued = 121;
      while (taken.count(uncatalogued)) ++uncatalogued;
      civic = nullptr;
    }
    Draft d{road->street(), civic ? civic_text(civic->value, civic->red) : std::to_string(uncatalogued),
            muni.name};

    if (kind != Kind::kUnreconcilable) {
      GoldEntry g;
      g.road = Iri(road->iri);
      if (civic) {
        g.street_number = Iri(civic->iri);
        g.level = Level::kNumber;
      }
      corpus.gold.entries.emplace(iri, std::move(g));
      corpus.original.emplace(iri, address::RawAddress{d.street, d.civic, d.municipality, std::nullopt});
    }

    std::vector<std::string> applied;
    if (kind != Kind::kClean) {
      // Work on tokens so that corruptions compose.
      std::string qualifier = road->qualifier;
      std::vector<std::string> name = road->name;
      std::string civic_str = d.civic;
      std::string municipality = d.municipality;
      const bool red = civic && civic->red;

      auto fits = [&](const std::string& type) {
        if (type == "reorderedName") return road->kind == RoadKind::kPerson;
        if (type == "romanNumeral") return road->kind == RoadKind::kRoman;
        if (type == "redNumber") return red;
        return true;
      };
      std::set<std::string> chosen;
      for (const char* t : kErrorTypes) {
        if (fits(t) && rng.chance(rate(t))) chosen.insert(t);
      }
      if (chosen.empty() && kind == Kind::kCorrupted) {
        // Every corrupted service differs from its catalog form.
        std::vector<std::string> options;
        for (const char* t : kErrorTypes) {
          if (fits(t) && rate(t) > 0) options.push_back(t);
        }
        if (options.empty()) options = {"noiseChars"};
        chosen.insert(options[rng.pick(options.size())]);
      }
      if (chosen.count("qualifierVariant")) {
        const auto& variants = qualifier_info(qualifier).variants;
        qualifier = variants[rng.pick(variants.size())];
      }
      if (chosen.count("reorderedName")) std::swap(name[name.size() - 1], name[name.size() - 2]);
      if (chosen.count("romanNumeral")) name.back() = std::to_string(roman_to_int(name.back()));
      if (chosen.count("typo")) {
        std::vector<size_t> eligible;
        for (size_t k = 0; k < name.size(); ++k) {
          if (name[k].size() >= 4 && !address::is_roman_numeral(name[k]) &&
              !std::all_of(name[k].begin(), name[k].end(), [](char c) { return c >= '0' && c <= '9'; })) {
            eligible.push_back(k);
          }
        }
        if (!eligible.empty()) {
          size_t k = eligible[rng.pick(eligible.size())];
          name[k] = typo(rng, name[k]);
        } else {
          chosen.erase("typo");
        }
      }
      std::string street = qualifier + " " + join(name, " ");
      if (chosen.count("noiseChars")) {
        static const char* kNoise[] = {" -", "-", " /", "/", " \xC2\xB0", "?", ",", " - /"};
        size_t n = 1 + rng.pick(2);
        for (size_t k = 0; k < n; ++k) {
          auto spaces = std::vector<size_t>{street.size()};
          for (size_t p = 0; p < street.size(); ++p) {
            if (street[p] == ' ') spaces.push_back(p);
          }
          size_t at = spaces[rng.pick(spaces.size())];
          street.insert(at, kNoise[rng.pick(std::size(kNoise))]);
        }
      }
      if (chosen.count("redNumber")) {
        static const char* kRed[] = {"R", " ROSSO", " R", "/r", "r"};
        civic_str = std::to_string(civic->value) + kRed[rng.pick(std::size(kRed))];
      }
      if (chosen.count("malformedCivic")) {
        static const char* kSuffix[] = {"D", "/AB", "INT.1", " B", "/A"};
        auto cut = civic_str.find_first_not_of("0123456789");
        std::string digits = civic_str.substr(0, cut);
        std::string rest = cut == std::string::npos ? "" : civic_str.substr(cut);
        // Keep a letter colour marker apart from the new suffix.
        if (!rest.empty() && rest[0] != ' ' && rest[0] != '/') rest = " " + rest;
        civic_str = digits + kSuffix[rng.pick(std::size(kSuffix))] + rest;
      }
      if (chosen.count("missingCivic")) {
        static const char* kMissing[] = {"SNC", "0", ""};
        civic_str = kMissing[rng.pick(std::size(kMissing))];
      }
      if (chosen.count("aliasMunicipality")) municipality = muni.alias;
      d = Draft{street, civic_str, municipality};
      applied.assign(chosen.begin(), chosen.end());
    }

    reconcile::TargetService s;
    s.iri = Iri(iri);
    s.address = address::RawAddress{d.street, d.civic, d.municipality, std::nullopt};
    if (rng.chance(spec.coordinate_rate)) {
      s.coordinates = geo::GeoPoint{muni.lat + rng.uniform(-0.02, 0.02), muni.lon + rng.uniform(-0.02, 0.02)};
    }
    if (kind == Kind::kClean) corpus.clean.push_back(iri);
    if (kind == Kind::kUnreconcilable) corpus.unreconcilable.push_back(iri);
    corpus.applied.emplace(iri, std::move(applied));
    corpus.services.push_back(std::move(s));
  }
  return corpus;
}

}  // namespace km4::eval

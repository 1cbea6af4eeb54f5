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

#include "km4/ingestion.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <json.hpp>

#include "km4/common.hpp"
#include "km4/realtime.hpp"
#include "km4/vocab.hpp"

namespace km4::ingest {

namespace {

using json = nlohmann::json;

template <typename E, size_t N>
std::optional<E> from_table(std::string_view s, const std::pair<E, std::string_view> (&table)[N]) {
  for (const auto& [e, name] : table) {
    if (name == s) return e;
  }
  return std::nullopt;
}

template <typename E, size_t N>
std::string_view to_table(E v, const std::pair<E, std::string_view> (&table)[N]) {
  for (const auto& [e, name] : table) {
    if (e == v) return name;
  }
  return "";
}

constexpr std::pair<OriginalFormat, std::string_view> kFormats[] = {
    {OriginalFormat::kCsv, "CSV"},
    {OriginalFormat::kXml, "XML"},
    {OriginalFormat::kPolyline, "POLYLINE"},
    {OriginalFormat::kFeed, "FEED"},
};
constexpr std::pair<ProcessType, std::string_view> kProcessTypes[] = {
    {ProcessType::kStatic, "static"},
    {ProcessType::kSemiStatic, "semi-static"},
    {ProcessType::kRealtime, "realtime"},
};
constexpr std::pair<AutomationLevel, std::string_view> kAutomation[] = {
    {AutomationLevel::kAutomatic, "automatic"},
    {AutomationLevel::kSemiAutomatic, "semi-automatic"},
    {AutomationLevel::kManual, "manual"},
};
constexpr std::pair<DatasetStatus, std::string_view> kStatuses[] = {
    {DatasetStatus::kRegistered, "registered"}, {DatasetStatus::kIngested, "ingested"},
    {DatasetStatus::kImproved, "improved"},     {DatasetStatus::kMapped, "mapped"},
    {DatasetStatus::kIndexed, "indexed"},       {DatasetStatus::kFailed, "failed"},
};

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), is_digit);
}

std::string meta_literal_or(const store::QuadStore& store, const Iri& subject, std::string_view local) {
  store::Pattern p;
  p.subject = subject;
  p.predicate = Iri(vocab::meta(local));
  auto rows = store.match(p);
  return rows.empty() ? std::string() : rows.front().object.value();
}

}  // namespace

std::string_view to_string(OriginalFormat v) { return to_table(v, kFormats); }
std::string_view to_string(ProcessType v) { return to_table(v, kProcessTypes); }
std::string_view to_string(AutomationLevel v) { return to_table(v, kAutomation); }
std::string_view to_string(DatasetStatus v) { return to_table(v, kStatuses); }

std::optional<OriginalFormat> original_format_from_string(std::string_view s) {
  return from_table(to_upper_ascii(s), kFormats);
}
std::optional<ProcessType> process_type_from_string(std::string_view s) {
  return from_table(to_lower_ascii(s), kProcessTypes);
}
std::optional<AutomationLevel> automation_level_from_string(std::string_view s) {
  return from_table(to_lower_ascii(s), kAutomation);
}
std::optional<DatasetStatus> dataset_status_from_string(std::string_view s) {
  return from_table(to_lower_ascii(s), kStatuses);
}

bool can_transition(DatasetStatus from, DatasetStatus to) {
  if (to == DatasetStatus::kFailed) return true;
  if (from == DatasetStatus::kFailed) return to == DatasetStatus::kRegistered || to == DatasetStatus::kIngested;
  // A finished dataset starts its next scheduled cycle.
  if (from == DatasetStatus::kIndexed) return to == DatasetStatus::kIngested;
  return static_cast<int>(to) > static_cast<int>(from);
}

DatasetDescriptor DatasetDescriptor::parse(std::string_view text) {
  std::map<std::string, std::string> kv;
  size_t lineno = 0;
  for (const auto& raw : split(text, '\n')) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw_error(ErrorCode::kParse, "descriptor line " + std::to_string(lineno) + ": expected key=value");
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto take = [&](const std::string& key, bool required) -> std::string {
    auto it = kv.find(key);
    if (it == kv.end()) {
      if (required) throw_error(ErrorCode::kParse, "descriptor missing key: " + key);
      return {};
    }
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto bad = [](const std::string& key, const std::string& v) {
    throw_error(ErrorCode::kParse, "descriptor " + key + ": invalid value '" + v + "'");
  };

  DatasetDescriptor d;
  d.id = take("id", true);
  d.creation_date = parse_datetime(take("creationDate", true));
  d.source = take("source", false);
  std::string v = take("originalFormat", true);
  if (auto f = original_format_from_string(v)) d.original_format = *f; else bad("originalFormat", v);
  d.description = take("description", false);
  d.license = take("license", false);
  v = take("processType", true);
  if (auto p = process_type_from_string(v)) d.process_type = *p; else bad("processType", v);
  v = take("automationLevel", false);
  if (!v.empty()) {
    if (auto a = automation_level_from_string(v)) d.automation_level = *a; else bad("automationLevel", v);
  }
  d.access_type = take("accessType", false);
  v = take("updatePeriod", false);
  if (!v.empty()) {
    auto dur = try_parse_duration(v);
    if (!dur) bad("updatePeriod", v);
    d.update_period = *dur;
  }
  v = take("lastUpdate", false);
  if (!v.empty()) d.last_update = parse_datetime(v);
  v = take("tripleCreationDate", false);
  if (!v.empty()) d.triple_creation_date = parse_datetime(v);
  v = take("status", false);
  if (!v.empty()) {
    if (auto s = dataset_status_from_string(v)) d.status = *s; else bad("status", v);
  }
  v = take("macroclass", true);
  if (auto m = schema::macroclass_from_string(v)) d.macroclass = *m; else bad("macroclass", v);
  if (!kv.empty()) throw_error(ErrorCode::kParse, "descriptor has unknown key: " + kv.begin()->first);
  d.validate();
  return d;
}

std::string DatasetDescriptor::serialize() const {
  std::ostringstream out;
  out << "id=" << id << '\n'
      << "creationDate=" << format_datetime(creation_date) << '\n'
      << "source=" << source << '\n'
      << "originalFormat=" << to_string(original_format) << '\n'
      << "description=" << description << '\n'
      << "license=" << license << '\n'
      << "processType=" << to_string(process_type) << '\n'
      << "automationLevel=" << to_string(automation_level) << '\n'
      << "accessType=" << access_type << '\n'
      << "updatePeriod=" << format_duration(update_period) << '\n';
  if (last_update) out << "lastUpdate=" << format_datetime(*last_update) << '\n';
  if (triple_creation_date) out << "tripleCreationDate=" << format_datetime(*triple_creation_date) << '\n';
  out << "status=" << to_string(status) << '\n' << "macroclass=" << schema::to_string(macroclass) << '\n';
  return out.str();
}

void DatasetDescriptor::validate() const {
  if (id.empty()) throw_error(ErrorCode::kInvalidArgument, "descriptor id is empty");
  for (char c : id) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || is_digit(c) || c == '-' || c == '_' || c == '.';
    if (!ok) throw_error(ErrorCode::kInvalidArgument, "descriptor id has invalid character: " + id);
  }
  if (process_type == ProcessType::kRealtime) {
    if (update_period == Duration{}) {
      throw_error(ErrorCode::kInvalidArgument, "realtime dataset " + id + " needs an updatePeriod");
    }
    if (max_length(update_period) > std::chrono::hours(24)) {
      throw_error(ErrorCode::kInvalidArgument, "realtime dataset " + id + " has updatePeriod over one day");
    }
  }
}

MappingSpec MappingSpec::parse(std::string_view text) {
  MappingSpec m;
  enum class Section { kNone, kClass, kProp, kLink } section = Section::kNone;
  size_t lineno = 0;
  for (const auto& raw : split(text, '\n')) {
    ++lineno;
    std::string line = raw;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto where = [&] { return "mapping line " + std::to_string(lineno) + ": "; };
    if (t == "CLASS") { section = Section::kClass; continue; }
    if (t == "PROP") { section = Section::kProp; continue; }
    if (t == "LINK") { section = Section::kLink; continue; }
    auto cols = split(line, '\t');
    for (auto& c : cols) c = trim(c);
    if (cols.size() == 2 && cols[0] == "DATASET") {
      m.dataset_id = cols[1];
      continue;
    }
    switch (section) {
      case Section::kNone:
        throw_error(ErrorCode::kParse, where() + "row outside CLASS/PROP/LINK section");
      case Section::kClass: {
        if (cols.size() != 3) throw_error(ErrorCode::kParse, where() + "CLASS rows need role, class, keys");
        ClassBinding b{cols[0], cols[1], {}};
        for (auto& k : split(cols[2], ',')) {
          std::string key = trim(k);
          if (!key.empty()) b.key_columns.push_back(key);
        }
        if (b.key_columns.empty()) throw_error(ErrorCode::kParse, where() + "CLASS row needs key columns");
        m.classes.push_back(std::move(b));
        break;
      }
      case Section::kProp:
        if (cols.size() != 4) {
          throw_error(ErrorCode::kParse, where() + "PROP rows need role, property, column, datatype");
        }
        m.properties.push_back(PropertyBinding{cols[0], cols[1], cols[2], cols[3]});
        break;
      case Section::kLink:
        if (cols.size() != 3) throw_error(ErrorCode::kParse, where() + "LINK rows need from, property, to");
        m.links.push_back(LinkBinding{cols[0], cols[1], cols[2]});
        break;
    }
  }
  return m;
}

std::string MappingSpec::serialize() const {
  std::ostringstream out;
  if (!dataset_id.empty()) out << "DATASET\t" << dataset_id << '\n';
  out << "CLASS\n";
  for (const auto& c : classes) out << c.role << '\t' << c.class_name << '\t' << join(c.key_columns, ",") << '\n';
  out << "PROP\n";
  for (const auto& p : properties) out << p.role << '\t' << p.property << '\t' << p.column << '\t' << p.datatype << '\n';
  out << "LINK\n";
  for (const auto& l : links) out << l.from_role << '\t' << l.property << '\t' << l.to_role << '\n';
  return out.str();
}

const ClassBinding* MappingSpec::find_role(std::string_view role) const {
  for (const auto& c : classes) {
    if (c.role == role) return &c;
  }
  return nullptr;
}

void MappingSpec::validate(const schema::Schema& schema) const {
  std::set<std::string> roles;
  for (const auto& c : classes) {
    if (!roles.insert(c.role).second) throw_error(ErrorCode::kInvalidArgument, "duplicate mapping role: " + c.role);
    if (!schema.find_class(c.class_name)) {
      throw_error(ErrorCode::kInvalidArgument, "mapping references unknown class: " + c.class_name);
    }
  }
  for (const auto& p : properties) {
    if (!roles.count(p.role)) throw_error(ErrorCode::kInvalidArgument, "mapping references undeclared role: " + p.role);
    const auto* def = schema.find_property(p.property);
    if (!def) throw_error(ErrorCode::kInvalidArgument, "mapping references unknown property: " + p.property);
    if (p.datatype == "iri") {
      if (def->kind != schema::PropertyKind::kObject) {
        throw_error(ErrorCode::kInvalidArgument, "property " + p.property + " is not an object property");
      }
    } else {
      if (!datatype_from_name(p.datatype)) {
        throw_error(ErrorCode::kInvalidArgument, "mapping references unknown datatype: " + p.datatype);
      }
      if (def->kind != schema::PropertyKind::kData) {
        throw_error(ErrorCode::kInvalidArgument, "property " + p.property + " is not a data property");
      }
    }
  }
  for (const auto& l : links) {
    for (const auto& r : {l.from_role, l.to_role}) {
      if (!roles.count(r)) throw_error(ErrorCode::kInvalidArgument, "mapping references undeclared role: " + r);
    }
    const auto* def = schema.find_property(l.property);
    if (!def) throw_error(ErrorCode::kInvalidArgument, "mapping references unknown property: " + l.property);
    if (def->kind != schema::PropertyKind::kObject) {
      throw_error(ErrorCode::kInvalidArgument, "link property " + l.property + " is not an object property");
    }
  }
}

const std::string* find_field(const FieldMap& fields, std::string_view column) {
  for (const auto& [k, v] : fields) {
    if (k == column) return &v;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Staging

namespace {

json fields_to_json(const FieldMap& f) {
  json a = json::array();
  for (const auto& [k, v] : f) a.push_back(json::array({k, v}));
  return a;
}

FieldMap fields_from_json(const json& a) {
  FieldMap f;
  for (const auto& e : a) f.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>());
  return f;
}

json record_to_json(const StagedRecord& r) {
  json changes = json::array();
  for (const auto& c : r.change_log) changes.push_back(json::array({c.column, c.before, c.after, c.rule_id}));
  return json{{"dataset", r.dataset_id},
              {"key", r.record_key},
              {"version", r.version},
              {"ingestedAt", format_datetime(r.ingested_at)},
              {"raw", fields_to_json(r.raw_fields)},
              {"clean", fields_to_json(r.clean_fields)},
              {"changes", changes}};
}

StagedRecord record_from_json(const json& j) {
  StagedRecord r;
  r.dataset_id = j.at("dataset").get<std::string>();
  r.record_key = j.at("key").get<std::string>();
  r.version = j.at("version").get<int>();
  r.ingested_at = parse_datetime(j.at("ingestedAt").get<std::string>());
  r.raw_fields = fields_from_json(j.at("raw"));
  r.clean_fields = fields_from_json(j.at("clean"));
  for (const auto& c : j.at("changes")) {
    r.change_log.push_back(Change{c.at(0).get<std::string>(), c.at(1).get<std::string>(),
                                  c.at(2).get<std::string>(), c.at(3).get<std::string>()});
  }
  return r;
}

}  // namespace

StagingStore::StagingStore(const std::filesystem::path& file) {
  if (std::filesystem::exists(file)) {
    std::ifstream in(file, std::ios::binary);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      try {
        StagedRecord r = record_from_json(json::parse(line));
        records_[Key{r.dataset_id, r.record_key, r.version}] = std::move(r);
      } catch (const std::exception& e) {
        if (in.peek() == std::char_traits<char>::eof()) break;  // torn tail
        throw_error(ErrorCode::kParse, file.string() + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
  }
  log_.open(file, std::ios::app | std::ios::binary);
  if (!log_) throw_error(ErrorCode::kIo, "cannot open staging file: " + file.string());
}

void StagingStore::persist(const StagedRecord& r) {
  if (!log_.is_open()) return;
  log_ << record_to_json(r).dump() << '\n';
  log_.flush();
  if (!log_) throw_error(ErrorCode::kIo, "staging write failed");
}

StagedRecord StagingStore::put(const std::string& dataset_id, const std::string& record_key, FieldMap raw,
                               const DateTime& ingested_at) {
  std::lock_guard lock(mutex_);
  int version = 1;
  auto it = records_.upper_bound(Key{dataset_id, record_key, std::numeric_limits<int>::max()});
  if (it != records_.begin()) {
    auto prev = std::prev(it);
    if (std::get<0>(prev->first) == dataset_id && std::get<1>(prev->first) == record_key) {
      if (prev->second.raw_fields == raw) return prev->second;
      version = std::get<2>(prev->first) + 1;
    }
  }
  StagedRecord r;
  r.dataset_id = dataset_id;
  r.record_key = record_key;
  r.clean_fields = raw;
  r.raw_fields = std::move(raw);
  r.version = version;
  r.ingested_at = ingested_at;
  records_[Key{dataset_id, record_key, version}] = r;
  persist(r);
  return r;
}

void StagingStore::update(const StagedRecord& record) {
  std::lock_guard lock(mutex_);
  auto it = records_.find(Key{record.dataset_id, record.record_key, record.version});
  if (it == records_.end()) {
    throw_error(ErrorCode::kNotFound, "no staged record " + record.dataset_id + "/" + record.record_key);
  }
  if (it->second.raw_fields != record.raw_fields) {
    throw_error(ErrorCode::kConflict, "raw fields of a staged record are immutable: " + record.record_key);
  }
  if (it->second == record) return;
  it->second.clean_fields = record.clean_fields;
  it->second.change_log = record.change_log;
  persist(it->second);
}

std::optional<StagedRecord> StagingStore::latest(const std::string& dataset_id, const std::string& record_key) const {
  auto h = history(dataset_id, record_key);
  if (h.empty()) return std::nullopt;
  return h.back();
}

std::vector<StagedRecord> StagingStore::history(const std::string& dataset_id, const std::string& record_key) const {
  std::lock_guard lock(mutex_);
  std::vector<StagedRecord> out;
  for (auto it = records_.lower_bound(Key{dataset_id, record_key, 0});
       it != records_.end() && std::get<0>(it->first) == dataset_id && std::get<1>(it->first) == record_key; ++it) {
    out.push_back(it->second);
  }
  return out;
}

std::vector<StagedRecord> StagingStore::dataset(const std::string& dataset_id) const {
  std::lock_guard lock(mutex_);
  std::vector<StagedRecord> out;
  for (auto it = records_.lower_bound(Key{dataset_id, "", 0});
       it != records_.end() && std::get<0>(it->first) == dataset_id; ++it) {
    out.push_back(it->second);
  }
  return out;
}

size_t StagingStore::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

size_t StagingStore::size(const std::string& dataset_id) const {
  return dataset(dataset_id).size();
}

// ---------------------------------------------------------------------------
// Quality improvement

RuleSet RuleSet::from_mapping(const MappingSpec& mapping) {
  RuleSet rs;
  for (const auto& c : mapping.classes) {
    for (const auto& k : c.key_columns) rs.column_rules[k];
  }
  for (const auto& p : mapping.properties) {
    auto& rules = rs.column_rules[p.column];
    auto add = [&](const char* r) {
      if (std::find(rules.begin(), rules.end(), r) == rules.end()) rules.push_back(r);
    };
    if (p.datatype == "dateTime") add("date");
    if (p.property == "postalCode") add("cap");
    if (p.property == "phone" || p.property == "fax") add("phone");
    if (p.property == "email") add("email");
    if (p.property == "url") add("url");
    if (p.property == "streetAddress") add("address");
    if (p.property == "civic" || p.property == "number") add("civic");
    if (p.property == "municipalityName") add("locality");
    if (p.property == "ATECOcode") add("ateco");
  }
  return rs;
}

namespace {

struct RuleResult {
  std::string value;
  bool flagged = false;
};

RuleResult rule_date(const std::string& v) {
  if (v.empty() || try_parse_datetime(v)) return {v};
  // Day-first numeric dates, optionally followed by hh:mm[:ss].
  std::string date = v;
  std::string time;
  auto sp = v.find_first_of(" T");
  if (sp != std::string::npos) {
    date = v.substr(0, sp);
    time = trim(v.substr(sp + 1));
  }
  std::vector<std::string> parts;
  for (char sep : {'/', '-', '.'}) {
    if (date.find(sep) != std::string::npos) {
      parts = split(date, sep);
      break;
    }
  }
  if (parts.size() != 3 || !all_digits(parts[0]) || !all_digits(parts[1]) || !all_digits(parts[2]) ||
      parts[0].size() > 2 || parts[1].size() > 2 || parts[2].size() != 4) {
    return {v, true};
  }
  auto pad = [](const std::string& s) { return s.size() == 1 ? "0" + s : s; };
  std::string iso = parts[2] + "-" + pad(parts[1]) + "-" + pad(parts[0]);
  if (!time.empty()) {
    auto hm = split(time, ':');
    if (hm.size() < 2 || hm.size() > 3) return {v, true};
    for (const auto& x : hm) {
      if (!all_digits(x) || x.size() > 2) return {v, true};
    }
    iso += "T" + pad(hm[0]) + ":" + pad(hm[1]) + ":" + (hm.size() == 3 ? pad(hm[2]) : std::string("00"));
  }
  if (!try_parse_datetime(iso)) return {v, true};
  return {iso};
}

RuleResult rule_cap(const std::string& v) {
  std::string s;
  for (char c : v) {
    if (c != ' ') s.push_back(c);
  }
  if (s.empty()) return {v};
  if (s.size() == 5 && all_digits(s)) return {s};
  return {v, true};
}

RuleResult rule_phone(const std::string& v) {
  std::string s;
  for (char c : v) {
    if (c == ' ' || c == '-' || c == '/' || c == '.' || c == '(' || c == ')') continue;
    s.push_back(c);
  }
  if (s.empty()) return {v};
  if (starts_with(s, "0039")) s = "+39" + s.substr(4);
  if (s[0] == '+') {
    if (s.size() > 4 && all_digits(s.substr(1))) return {s};
    return {v, true};
  }
  if (all_digits(s) && s.size() >= 9 && s.size() <= 10) return {"+39" + s};
  return {v, true};
}

RuleResult rule_email(const std::string& v) {
  if (v.empty()) return {v};
  std::string s = to_lower_ascii(v);
  auto at = s.find('@');
  bool ok = at != std::string::npos && at > 0 && s.find('@', at + 1) == std::string::npos &&
            s.find(' ') == std::string::npos && s.find('.', at + 2) != std::string::npos && s.back() != '.';
  if (!ok) return {v, true};
  return {s};
}

RuleResult rule_url(const std::string& v) {
  if (v.empty()) return {v};
  std::string s = v;
  if (starts_with(to_lower_ascii(s), "www.")) s = "http://" + s;
  std::string lower = to_lower_ascii(s);
  if ((starts_with(lower, "http://") || starts_with(lower, "https://")) && s.find(' ') == std::string::npos &&
      Iri::is_valid(s)) {
    return {s};
  }
  return {v, true};
}

RuleResult rule_civic(const std::string& v) {
  if (v.empty()) return {v};
  auto civics = address::parse_civic(v);
  std::vector<std::string> parts;
  for (const auto& c : civics) {
    if (c.flagged) return {v, true};
    if (!c.value) return {"SNC"};
    std::string p = std::to_string(*c.value);
    if (!c.suffix.empty()) p += "/" + c.suffix;
    if (c.color == address::CivicColor::kRed) p += "/R";
    parts.push_back(p);
  }
  return {join(parts, "-")};
}

RuleResult rule_ateco(const std::string& v) {
  if (v.empty()) return {v};
  auto groups = split(v, '.');
  size_t digits = 0;
  bool ok = groups.size() <= 3;
  for (size_t i = 0; ok && i < groups.size(); ++i) {
    const auto& g = groups[i];
    ok = all_digits(g) && (g.size() == 2 || (i + 1 == groups.size() && i > 0 && g.size() == 1));
    digits += g.size();
  }
  ok = ok && digits >= 2 && digits <= 6;
  return ok ? RuleResult{v} : RuleResult{v, true};
}

}  // namespace

StagedRecord quality_improve(const StagedRecord& record, const RuleSet& rules,
                             const address::QualifierTable& table) {
  StagedRecord out = record;
  out.clean_fields.clear();
  out.change_log.clear();
  for (const auto& [column, raw] : record.raw_fields) {
    std::string value = raw;
    auto apply = [&](const std::string& rule_id, const RuleResult& r) {
      if (r.flagged) {
        out.change_log.push_back(Change{column, value, value, "flag-only"});
        return;
      }
      if (r.value != value) {
        out.change_log.push_back(Change{column, value, r.value, rule_id});
        value = r.value;
      }
    };
    apply("trim", RuleResult{trim(value)});
    auto it = rules.column_rules.find(column);
    if (it != rules.column_rules.end()) {
      for (const auto& rule : it->second) {
        if (rule == "date") apply(rule, rule_date(value));
        else if (rule == "cap") apply(rule, rule_cap(value));
        else if (rule == "phone") apply(rule, rule_phone(value));
        else if (rule == "email") apply(rule, rule_email(value));
        else if (rule == "url") apply(rule, rule_url(value));
        else if (rule == "civic") apply(rule, rule_civic(value));
        else if (rule == "ateco") apply(rule, rule_ateco(value));
        else if (rule == "locality") apply(rule, RuleResult{address::basic_fold(address::fold_accents(value))});
        else if (rule == "address") {
          if (!value.empty()) apply(rule, RuleResult{address::normalize({value, "", "", {}}, table).street()});
        }
      }
    }
    out.clean_fields.emplace_back(column, value);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parsers

Table parse_csv(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  // Delimiter: the candidate seen most often in the header, outside quotes.
  char delim = ',';
  {
    size_t best = 0;
    auto eol = text.find('\n');
    std::string_view header = text.substr(0, eol);
    for (char cand : {',', ';', '\t', '|'}) {
      size_t n = 0;
      bool quoted = false;
      for (char c : header) {
        if (c == '"') quoted = !quoted;
        else if (c == cand && !quoted) ++n;
      }
      if (n > best) {
        best = n;
        delim = cand;
      }
    }
  }

  std::vector<std::vector<std::string>> records;
  std::vector<size_t> record_lines;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false;
  bool any = false;
  size_t line = 1;
  size_t row_line = 1;
  auto end_row = [&] {
    row.push_back(cell);
    cell.clear();
    bool blank = row.size() == 1 && row[0].empty() && !any;
    if (!blank) {
      records.push_back(std::move(row));
      record_lines.push_back(row_line);
    }
    row.clear();
    any = false;
  };
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        cell.push_back(c);
      }
      continue;
    }
    if (c == '"' && cell.empty()) {
      quoted = true;
      any = true;
    } else if (c == delim) {
      row.push_back(cell);
      cell.clear();
      any = true;
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      continue;
    } else if (c == '\n') {
      end_row();
      ++line;
      row_line = line;
    } else {
      cell.push_back(c);
      any = true;
    }
  }
  if (quoted) throw_error(ErrorCode::kParse, "row " + std::to_string(row_line) + ": unterminated quoted field");
  if (!cell.empty() || !row.empty() || any) end_row();
  if (records.empty()) throw_error(ErrorCode::kParse, "empty CSV input");

  Table t;
  t.columns = records[0];
  for (size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.columns.size()) {
      throw_error(ErrorCode::kParse, "row " + std::to_string(record_lines[r]) + ": expected " +
                                         std::to_string(t.columns.size()) + " columns, found " +
                                         std::to_string(records[r].size()));
    }
    FieldMap f;
    for (size_t c = 0; c < t.columns.size(); ++c) f.emplace_back(t.columns[c], records[r][c]);
    t.rows.push_back(std::move(f));
  }
  return t;
}

Table parse_xml(std::string_view text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw_error(ErrorCode::kParse, "XML line " + std::to_string(e.line()) + ": " + e.message());
  }
  Table t;
  auto root = std::find_if(tree.begin(), tree.end(), [](const auto& kv) { return kv.first[0] != '<'; });
  if (root == tree.end()) throw_error(ErrorCode::kParse, "XML document has no root element");
  std::set<std::string> seen;
  size_t index = 0;
  for (const auto& [name, rec] : root->second) {
    if (name.empty() || name[0] == '<') continue;
    ++index;
    FieldMap f;
    for (const auto& [field, node] : rec) {
      if (field.empty() || field[0] == '<') continue;
      if (!node.empty()) {
        throw_error(ErrorCode::kParse, "record " + std::to_string(index) + " column " + field + ": nested element");
      }
      f.emplace_back(field, node.data());
      if (seen.insert(field).second) t.columns.push_back(field);
    }
    t.rows.push_back(std::move(f));
  }
  return t;
}

Table parse_polyline(std::string_view text) {
  Table t;
  t.columns = {"element", "sequence", "long", "lat"};
  std::string element;
  size_t seq = 0;
  size_t lineno = 0;
  for (const auto& raw : split(text, '\n')) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (starts_with(line, "ELEMENT")) {
      element = trim(line.substr(7));
      if (element.empty()) throw_error(ErrorCode::kParse, "row " + std::to_string(lineno) + ": ELEMENT without id");
      seq = 0;
      continue;
    }
    if (element.empty()) throw_error(ErrorCode::kParse, "row " + std::to_string(lineno) + ": point before ELEMENT");
    auto xy = split(line, ',');
    if (xy.size() != 2) {
      throw_error(ErrorCode::kParse, "row " + std::to_string(lineno) + ": expected lon,lat");
    }
    std::string lon = trim(xy[0]);
    std::string lat = trim(xy[1]);
    if (!Literal::is_valid(lon, Datatype::kDecimal) || !Literal::is_valid(lat, Datatype::kDecimal) ||
        !geo::GeoPoint::is_valid(std::stod(lat), std::stod(lon))) {
      throw_error(ErrorCode::kParse, "row " + std::to_string(lineno) + " column lon,lat: invalid coordinates");
    }
    t.rows.push_back(FieldMap{{"element", element}, {"sequence", std::to_string(seq++)}, {"long", lon}, {"lat", lat}});
  }
  return t;
}

// ---------------------------------------------------------------------------
// Mapping

std::string mint_iri(std::string_view dataset_id, std::string_view role, const std::vector<std::string>& key_values) {
  std::string out = std::string(vocab::kResourceBase) + "/" + percent_encode(dataset_id) + "/" + percent_encode(role);
  for (const auto& k : key_values) out += "/" + percent_encode(k);
  return out;
}

std::string dataset_context_iri(std::string_view dataset_id) {
  return std::string(vocab::kResourceBase) + "/context/" + percent_encode(dataset_id);
}

std::string dataset_iri(std::string_view dataset_id) {
  return std::string(vocab::kResourceBase) + "/dataset/" + percent_encode(dataset_id);
}

std::string record_key(const FieldMap& fields, const MappingSpec& mapping, size_t row_number) {
  // Key columns of every role, first occurrence order: one row, one key.
  std::vector<std::string> columns;
  for (const auto& c : mapping.classes) {
    for (const auto& k : c.key_columns) {
      if (std::find(columns.begin(), columns.end(), k) == columns.end()) columns.push_back(k);
    }
  }
  std::vector<std::string> parts;
  bool any = false;
  for (const auto& k : columns) {
    const std::string* v = find_field(fields, k);
    parts.push_back(v ? trim(*v) : "");
    any = any || !parts.back().empty();
  }
  if (!any) return "row-" + std::to_string(row_number);
  return join(parts, "|");
}

std::vector<Quad> map_to_quads(const StagedRecord& record, const MappingSpec& mapping,
                               const schema::Schema& schema, std::vector<std::string>* diagnostics) {
  const Iri context(dataset_context_iri(record.dataset_id));
  const Iri rdf_type(std::string(vocab::kRdfType));
  auto note = [&](const std::string& msg) {
    if (diagnostics) diagnostics->push_back(msg);
  };

  std::map<std::string, Iri> role_iri;
  for (const auto& c : mapping.classes) {
    std::vector<std::string> keys;
    for (const auto& k : c.key_columns) {
      const std::string* v = find_field(record.clean_fields, k);
      if (!v || v->empty()) {
        note("record " + record.record_key + " skipped: missing key column " + k + " for role " + c.role);
        return {};
      }
      keys.push_back(*v);
    }
    role_iri.emplace(c.role, Iri(mint_iri(record.dataset_id, c.role, keys)));
  }

  std::vector<Quad> out;
  for (const auto& c : mapping.classes) {
    const Iri& s = role_iri.at(c.role);
    out.push_back(Quad{s, rdf_type, Term(Iri(schema.class_iri(c.class_name))), context});
  }
  for (const auto& p : mapping.properties) {
    const std::string* v = find_field(record.clean_fields, p.column);
    if (!v || v->empty()) continue;
    const Iri& s = role_iri.at(p.role);
    Iri pred(schema.property_iri(p.property));
    if (p.datatype == "iri") {
      std::string target = Iri::is_valid(*v) && v->find("://") != std::string::npos
                               ? *v
                               : vocab::km4c(percent_encode(*v));
      out.push_back(Quad{s, pred, Term(Iri(target)), context});
      if (p.property == "serviceCategory") {
        // Subclass-by-restriction materialized from the category value.
        const ClassBinding* cb = mapping.find_role(p.role);
        if (cb && (cb->class_name == "Service" || schema.is_subclass_of(cb->class_name, "Service"))) {
          std::string sub = schema::classify_service(schema, *v);
          if (sub != cb->class_name) out.push_back(Quad{s, rdf_type, Term(Iri(schema.class_iri(sub))), context});
          if (!schema::is_known_service_category(schema, *v)) {
            note("record " + record.record_key + ": unknown service category '" + *v + "' kept as Service");
          }
        }
      }
      continue;
    }
    Datatype dt = *datatype_from_name(p.datatype);
    if (!Literal::is_valid(*v, dt)) {
      note("record " + record.record_key + " column " + p.column + ": '" + *v + "' is not a valid " + p.datatype);
      continue;
    }
    out.push_back(Quad{s, pred, Term(Literal{*v, dt}), context});
  }
  for (const auto& l : mapping.links) {
    out.push_back(Quad{role_iri.at(l.from_role), Iri(schema.property_iri(l.property)),
                       Term(role_iri.at(l.to_role)), context});
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Quad> map_polyline(const std::vector<StagedRecord>& records, std::string_view dataset_id,
                               std::vector<std::string>* diagnostics) {
  const Iri context(dataset_context_iri(dataset_id));
  const Iri rdf_type(std::string(vocab::kRdfType));
  const Iri junction_class(vocab::km4c("Junction"));
  const Iri link_class(vocab::km4c("RoadLink"));
  const Iri lat_p(std::string(vocab::kGeoLat));
  const Iri long_p(std::string(vocab::kGeoLong));
  const Iri starting(vocab::km4c("starting"));
  const Iri ending(vocab::km4c("ending"));

  // element -> ordered points
  std::map<std::string, std::vector<std::pair<size_t, const StagedRecord*>>> elements;
  for (const auto& r : records) {
    const std::string* e = find_field(r.clean_fields, "element");
    const std::string* s = find_field(r.clean_fields, "sequence");
    if (!e || !s || !all_digits(*s)) {
      if (diagnostics) diagnostics->push_back("record " + r.record_key + " skipped: not a polyline point");
      continue;
    }
    elements[*e].emplace_back(std::stoul(*s), &r);
  }
  std::vector<Quad> out;
  for (auto& [element, points] : elements) {
    std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Iri> junctions;
    for (const auto& [seq, r] : points) {
      const std::string& lon = *find_field(r->clean_fields, "long");
      const std::string& lat = *find_field(r->clean_fields, "lat");
      Iri j(mint_iri(dataset_id, "junction", {lon + "," + lat}));
      out.push_back(Quad{j, rdf_type, Term(junction_class), context});
      out.push_back(Quad{j, lat_p, Term(Literal{lat, Datatype::kDecimal}), context});
      out.push_back(Quad{j, long_p, Term(Literal{lon, Datatype::kDecimal}), context});
      junctions.push_back(j);
    }
    for (size_t i = 0; i + 1 < junctions.size(); ++i) {
      Iri link(mint_iri(dataset_id, "roadlink", {element, std::to_string(i)}));
      out.push_back(Quad{link, rdf_type, Term(link_class), context});
      out.push_back(Quad{link, starting, Term(junctions[i]), context});
      out.push_back(Quad{link, ending, Term(junctions[i + 1]), context});
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// ISTAT support table

IstatTable IstatTable::parse(std::string_view text) {
  IstatTable t;
  size_t lineno = 0;
  for (const auto& raw : split(text, '\n')) {
    ++lineno;
    std::string line = raw;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || trim(line)[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() < 2) {
      throw_error(ErrorCode::kParse, "ISTAT table line " + std::to_string(lineno) + ": expected name and code");
    }
    std::vector<std::string> aliases(cols.begin() + 2, cols.end());
    t.add(trim(cols[0]), trim(cols[1]), aliases);
  }
  return t;
}

IstatTable IstatTable::load(const std::string& path) { return parse(read_file(path)); }

void IstatTable::add(std::string_view name, std::string_view code, const std::vector<std::string>& aliases) {
  std::string c(trim(code));
  by_name_[address::basic_fold(address::fold_accents(name))] = c;
  names_[c] = std::string(trim(name));
  for (const auto& a : aliases) {
    if (!trim(a).empty()) by_name_[address::basic_fold(address::fold_accents(a))] = c;
  }
}

std::optional<std::string> IstatTable::lookup(std::string_view name) const {
  auto it = by_name_.find(address::basic_fold(address::fold_accents(name)));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> IstatTable::name_of(std::string_view code) const {
  auto it = names_.find(std::string(code));
  if (it == names_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// Descriptor quads

std::vector<Quad> descriptor_quads(const DatasetDescriptor& d) {
  const Iri ctx{std::string(vocab::kMetadataContext)};
  const Iri s(dataset_iri(d.id));
  std::vector<Quad> out;
  out.push_back(Quad{s, Iri(std::string(vocab::kRdfType)), Term(Iri(vocab::km4c("Dataset"))), ctx});
  out.push_back(Quad{s, Iri(vocab::km4c("name")), Term(Literal{d.id, Datatype::kString}), ctx});
  auto lit = [&](std::string_view local, std::string value, Datatype dt = Datatype::kString) {
    if (dt == Datatype::kString && value.empty()) return;
    out.push_back(Quad{s, Iri(vocab::meta(local)), Term(Literal{std::move(value), dt}), ctx});
  };
  lit("creationDate", format_datetime(d.creation_date), Datatype::kDateTime);
  lit("source", d.source);
  lit("originalFormat", std::string(to_string(d.original_format)));
  lit("description", d.description);
  lit("license", d.license);
  lit("processType", std::string(to_string(d.process_type)));
  lit("automationLevel", std::string(to_string(d.automation_level)));
  lit("accessType", d.access_type);
  lit("updatePeriod", format_duration(d.update_period));
  if (d.last_update) lit("lastUpdate", format_datetime(*d.last_update), Datatype::kDateTime);
  if (d.triple_creation_date) lit("tripleCreationDate", format_datetime(*d.triple_creation_date), Datatype::kDateTime);
  lit("status", std::string(to_string(d.status)));
  lit("macroclass", std::string(schema::to_string(d.macroclass)));
  out.push_back(Quad{s, Iri(vocab::meta("context")), Term(Iri(dataset_context_iri(d.id))), ctx});
  return out;
}

std::optional<DatasetDescriptor> descriptor_from_store(const store::QuadStore& store, std::string_view id) {
  Iri s(dataset_iri(id));
  store::Pattern p;
  p.subject = s;
  p.context = Iri(std::string(vocab::kMetadataContext));
  if (store.match(p).empty()) return std::nullopt;
  std::ostringstream text;
  text << "id=" << id << '\n';
  for (const char* key : {"creationDate", "source", "originalFormat", "description", "license", "processType",
                          "automationLevel", "accessType", "updatePeriod", "lastUpdate", "tripleCreationDate",
                          "status", "macroclass"}) {
    std::string v = meta_literal_or(store, s, key);
    if (!v.empty()) text << key << '=' << v << '\n';
  }
  return DatasetDescriptor::parse(text.str());
}

// ---------------------------------------------------------------------------
// Pipeline

Pipeline::Pipeline(store::QuadStore& store, StagingStore& staging, address::QualifierTable table,
                   std::optional<std::filesystem::path> registry_dir)
    : store_(store), staging_(staging), table_(std::move(table)), registry_dir_(std::move(registry_dir)) {
  if (!registry_dir_) return;
  std::filesystem::create_directories(*registry_dir_);
  for (const auto& entry : std::filesystem::directory_iterator(*registry_dir_)) {
    if (entry.path().extension() != ".descriptor") continue;
    DatasetDescriptor d = DatasetDescriptor::parse(read_file(entry.path().string()));
    auto mpath = entry.path();
    mpath.replace_extension(".mapping");
    MappingSpec m;
    if (std::filesystem::exists(mpath)) m = MappingSpec::parse(read_file(mpath.string()));
    m.dataset_id = d.id;
    mappings_[d.id] = std::move(m);
    descriptors_[d.id] = std::move(d);
  }
}

void Pipeline::save(const DatasetDescriptor& d, const MappingSpec* m) {
  if (!registry_dir_) return;
  write_file((*registry_dir_ / (d.id + ".descriptor")).string(), d.serialize());
  if (m) write_file((*registry_dir_ / (d.id + ".mapping")).string(), m->serialize());
}

Iri Pipeline::register_dataset(DatasetDescriptor d, MappingSpec m) {
  d.validate();
  const schema::Schema& sch = schema::load_schema();
  m.dataset_id = d.id;
  m.validate(sch);
  std::lock_guard lock(mutex_);
  if (descriptors_.count(d.id)) throw_error(ErrorCode::kConflict, "dataset id already registered: " + d.id);
  d.status = DatasetStatus::kRegistered;
  Iri ctx(dataset_context_iri(d.id));
  store::DataKind kind = d.process_type == ProcessType::kRealtime ? store::DataKind::kRealtime : store::DataKind::kStatic;
  store_.tag_context(ctx, store::ContextTag{d.macroclass, kind, d.creation_date.offset_minutes});
  if (kind == store::DataKind::kRealtime) {
    store_.tag_context(Iri(realtime::instants_context(ctx.str())),
                       store::ContextTag{schema::MacroClass::kTemporal, kind, d.creation_date.offset_minutes});
  }
  store_.tag_context(Iri(std::string(vocab::kMetadataContext)),
                     store::ContextTag{schema::MacroClass::kMetadata, store::DataKind::kStatic, 0});
  auto quads = descriptor_quads(d);
  store_.insert(quads);
  save(d, &m);
  mappings_[d.id] = std::move(m);
  descriptors_[d.id] = std::move(d);
  return ctx;
}

DatasetDescriptor Pipeline::descriptor(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = descriptors_.find(id);
  if (it == descriptors_.end()) throw_error(ErrorCode::kNotFound, "unknown dataset: " + id);
  return it->second;
}

MappingSpec Pipeline::mapping(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = mappings_.find(id);
  if (it == mappings_.end()) throw_error(ErrorCode::kNotFound, "unknown dataset: " + id);
  return it->second;
}

std::vector<DatasetDescriptor> Pipeline::datasets() const {
  std::lock_guard lock(mutex_);
  std::vector<DatasetDescriptor> out;
  for (const auto& [id, d] : descriptors_) out.push_back(d);
  return out;
}

bool Pipeline::has_dataset(const std::string& id) const {
  std::lock_guard lock(mutex_);
  return descriptors_.count(id) > 0;
}

void Pipeline::set_istat_table(IstatTable table) {
  std::lock_guard lock(mutex_);
  istat_ = std::move(table);
}

void Pipeline::set_status(const std::string& id, DatasetStatus status) {
  std::lock_guard lock(mutex_);
  auto it = descriptors_.find(id);
  if (it == descriptors_.end()) throw_error(ErrorCode::kNotFound, "unknown dataset: " + id);
  set_status_locked(it->second, status);
}

void Pipeline::set_status_locked(DatasetDescriptor& d, DatasetStatus status) {
  if (d.status == status) return;
  if (!can_transition(d.status, status)) {
    throw_error(ErrorCode::kConflict, "dataset " + d.id + ": status cannot move from " +
                                          std::string(to_string(d.status)) + " to " + std::string(to_string(status)));
  }
  auto old_quads = descriptor_quads(d);
  d.status = status;
  auto new_quads = descriptor_quads(d);
  store_.remove(old_quads);
  store_.insert(new_quads);
  save(d, nullptr);
}

std::vector<StagedRecord> Pipeline::ingest_file(const std::string& id, const std::filesystem::path& file,
                                                const DateTime& now) {
  DatasetDescriptor d = descriptor(id);
  MappingSpec m = mapping(id);
  std::vector<StagedRecord> out;
  try {
    std::string text = read_file(file.string());
    if (d.original_format == OriginalFormat::kFeed) {
      for (const auto& p : realtime::parse_payloads(text)) {
        out.push_back(staging_.put(id, realtime::payload_key(p), realtime::payload_fields(p), now));
      }
    } else {
      Table t;
      switch (d.original_format) {
        case OriginalFormat::kCsv: t = parse_csv(text); break;
        case OriginalFormat::kXml: t = parse_xml(text); break;
        case OriginalFormat::kPolyline: t = parse_polyline(text); break;
        case OriginalFormat::kFeed: break;
      }
      for (size_t r = 0; r < t.rows.size(); ++r) {
        std::string key = d.original_format == OriginalFormat::kPolyline
                              ? *find_field(t.rows[r], "element") + "|" + *find_field(t.rows[r], "sequence")
                              : record_key(t.rows[r], m, r + 1);
        out.push_back(staging_.put(id, key, t.rows[r], now));
      }
    }
  } catch (const Error& e) {
    set_status(id, DatasetStatus::kFailed);
    throw Error(e.code(), "dataset " + id + ", file " + file.string() + ": " + e.what());
  }
  set_status(id, DatasetStatus::kIngested);
  return out;
}

IngestReport Pipeline::process_file(const std::string& id, const std::filesystem::path& file, const DateTime& now) {
  IngestReport report;
  report.dataset_id = id;
  size_t before = staging_.size(id);
  auto records = ingest_file(id, file, now);
  report.rows = records.size();
  report.new_versions = staging_.size(id) - before;

  DatasetDescriptor d = descriptor(id);
  MappingSpec m = mapping(id);
  const schema::Schema& sch = schema::load_schema();
  try {
    RuleSet rules = RuleSet::from_mapping(m);
    std::vector<StagedRecord> improved;
    improved.reserve(records.size());
    for (const auto& r : records) {
      StagedRecord q = d.original_format == OriginalFormat::kFeed ? r : quality_improve(r, rules, table_);
      staging_.update(q);
      improved.push_back(std::move(q));
    }
    set_status(id, DatasetStatus::kImproved);

    std::vector<Quad> quads;
    if (d.original_format == OriginalFormat::kPolyline) {
      quads = map_polyline(improved, id, &report.diagnostics);
    } else if (d.original_format == OriginalFormat::kFeed) {
      Iri ctx(dataset_context_iri(id));
      std::optional<IstatTable> istat;
      {
        std::lock_guard lock(mutex_);
        istat = istat_;
      }
      for (const auto& r : improved) {
        realtime::Payload p = realtime::payload_from_fields(r.clean_fields);
        if (p.type == realtime::PayloadType::kWeather && istat) {
          auto done = realtime::complete_weather_istat(p, *istat);
          if (done.flagged) report.diagnostics.push_back("record " + r.record_key + ": " + done.note);
          p = std::move(done.payload);
        }
        auto q = realtime::ingest_realtime(p, id, ctx);
        quads.insert(quads.end(), q.begin(), q.end());
      }
    } else {
      for (const auto& r : improved) {
        auto q = map_to_quads(r, m, sch, &report.diagnostics);
        quads.insert(quads.end(), q.begin(), q.end());
      }
    }
    set_status(id, DatasetStatus::kMapped);
    report.quads_mapped = quads.size();
    report.quads_inserted = store_.insert(quads);
    {
      std::lock_guard lock(mutex_);
      auto& live = descriptors_.at(id);
      auto old_quads = descriptor_quads(live);
      live.last_update = now;
      live.triple_creation_date = now;
      store_.remove(old_quads);
      store_.insert(descriptor_quads(live));
      save(live, nullptr);
    }
    set_status(id, DatasetStatus::kIndexed);
  } catch (const Error& e) {
    set_status(id, DatasetStatus::kFailed);
    throw Error(e.code(), "dataset " + id + ": " + e.what());
  }
  report.status = DatasetStatus::kIndexed;
  return report;
}

}  // namespace km4::ingest

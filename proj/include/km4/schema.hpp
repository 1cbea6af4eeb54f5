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

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "km4/quad.hpp"

namespace km4::schema {

enum class MacroClass {
  kAdministration,
  kStreetGuide,
  kPointOfInterest,
  kLocalPublicTransport,
  kSensors,
  kTemporal,
  kMetadata,
};

inline constexpr std::array<MacroClass, 7> kAllMacroClasses = {
    MacroClass::kAdministration, MacroClass::kStreetGuide,
    MacroClass::kPointOfInterest, MacroClass::kLocalPublicTransport,
    MacroClass::kSensors,        MacroClass::kTemporal,
    MacroClass::kMetadata,
};

std::string_view to_string(MacroClass m);
std::optional<MacroClass> macroclass_from_string(std::string_view s);

enum class PropertyKind { kObject, kData };
enum class Severity { kError, kWarning };

std::string_view to_string(Severity s);

struct PropertyConstraint {
  std::string property;
  PropertyKind kind = PropertyKind::kObject;
  /// Class name for object properties, scalar type name for data properties.
  std::string range;
  int min_card = 0;
  /// Absent means unbounded.
  std::optional<int> max_card;
  std::vector<std::string> allowed_values;
  Severity severity = Severity::kError;

  friend bool operator==(const PropertyConstraint&, const PropertyConstraint&) = default;
};

struct ClassDef {
  std::string name;
  MacroClass macroclass = MacroClass::kAdministration;
  std::optional<std::string> parent;
  std::vector<PropertyConstraint> constraints;

  friend bool operator==(const ClassDef&, const ClassDef&) = default;
};

struct PropertyDef {
  std::string name;
  std::string iri;
  PropertyKind kind = PropertyKind::kObject;

  friend bool operator==(const PropertyDef&, const PropertyDef&) = default;
};

struct ViolationReport {
  std::string entity;
  PropertyConstraint constraint;
  int observed_count = 0;
  Severity severity = Severity::kError;
  /// Set for allowed-value violations: the offending values.
  std::vector<std::string> offending_values;
};

class Schema {
 public:
  /// Adds a class; rejects duplicate names.
  void add_class(ClassDef def);
  /// Adds a property; rejects duplicate names.
  void add_property(PropertyDef def);
  /// Checks parents exist, chains are acyclic and constraint ranges are sane.
  void finalize();

  const std::vector<ClassDef>& classes() const { return classes_; }
  const std::vector<PropertyDef>& properties() const { return properties_; }

  const ClassDef* find_class(std::string_view name) const;
  /// Throws Error(kNotFound).
  const ClassDef& get_class(std::string_view name) const;
  const PropertyDef* find_property(std::string_view name) const;
  const PropertyDef* find_property_by_iri(std::string_view iri) const;

  /// The class itself followed by its ancestors, nearest first.
  std::vector<const ClassDef*> lineage(std::string_view name) const;
  bool is_subclass_of(std::string_view child, std::string_view ancestor) const;
  /// Own constraints plus inherited ones; a subclass constraint on the same
  /// property shadows the parent's.
  std::vector<PropertyConstraint> effective_constraints(std::string_view name) const;

  std::string class_iri(std::string_view name) const;
  std::string property_iri(std::string_view name) const;

  /// Text listing, one class per line:
  /// `name<TAB>macroclass<TAB>parent|-<TAB>constraint; constraint; ...`
  std::string dump() const;

  friend bool operator==(const Schema& a, const Schema& b) {
    return a.classes_ == b.classes_ && a.properties_ == b.properties_;
  }

 private:
  std::vector<ClassDef> classes_;
  std::vector<PropertyDef> properties_;
  std::map<std::string, size_t, std::less<>> class_index_;
  std::map<std::string, size_t, std::less<>> property_index_;
  std::map<std::string, size_t, std::less<>> property_iri_index_;
};

/// Builds the built-in km4City schema.
Schema build_schema();
/// Shared immutable instance of `build_schema()`.
const Schema& load_schema();

std::string format_constraint(const PropertyConstraint& c);

/// Validates `entity` (the subject of its outgoing quads) against every
/// constraint of `root_class` and its ancestors. Throws Error(kNotFound) for
/// an unknown class.
std::vector<ViolationReport> validate_entity(const Schema& schema, std::span<const Quad> quads,
                                             std::string_view root_class, std::string_view entity);

/// Same, with the entity inferred as the subject that no other quad in the set
/// points at (falls back to the first quad's subject).
std::vector<ViolationReport> validate_entity(const Schema& schema, std::span<const Quad> quads,
                                             std::string_view root_class);

/// Service subclass whose allowed categories contain `category`; "Service"
/// when none does.
std::string classify_service(const Schema& schema, std::string_view category);
bool is_known_service_category(const Schema& schema, std::string_view category);

/// Local value of a category term: literal lexical form or IRI local name.
std::string category_value(const Term& t);

}  // namespace km4::schema

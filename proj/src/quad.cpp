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

#include "km4/quad.hpp"

#include <charconv>
#include <cmath>

#include "km4/common.hpp"
#include "km4/time.hpp"
#include "km4/vocab.hpp"

namespace km4 {

bool Iri::is_valid(std::string_view v) {
  if (v.empty()) return false;
  auto colon = v.find(':');
  if (colon == std::string_view::npos || colon == 0) return false;
  auto is_alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); };
  if (!is_alpha(v[0])) return false;
  for (size_t i = 1; i < colon; ++i) {
    char c = v[i];
    if (!(is_alpha(c) || (c >= '0' && c <= '9') || c == '+' || c == '.' || c == '-')) return false;
  }
  for (unsigned char c : v) {
    if (c <= ' ' || c == '<' || c == '>' || c == '"' || c == '{' || c == '}' || c == '|' ||
        c == '\\' || c == '^' || c == '`' || c == 0x7f) {
      return false;
    }
  }
  return true;
}

Iri::Iri(std::string value) : value_(std::move(value)) {
  if (!is_valid(value_)) throw_error(ErrorCode::kInvalidArgument, "malformed IRI: '" + value_ + "'");
}

std::string_view datatype_iri(Datatype dt) {
  switch (dt) {
    case Datatype::kString: return "http://www.w3.org/2001/XMLSchema#string";
    case Datatype::kInteger: return "http://www.w3.org/2001/XMLSchema#integer";
    case Datatype::kDecimal: return "http://www.w3.org/2001/XMLSchema#decimal";
    case Datatype::kDateTime: return "http://www.w3.org/2001/XMLSchema#dateTime";
    case Datatype::kBoolean: return "http://www.w3.org/2001/XMLSchema#boolean";
  }
  return "";
}

std::string_view datatype_name(Datatype dt) {
  switch (dt) {
    case Datatype::kString: return "string";
    case Datatype::kInteger: return "integer";
    case Datatype::kDecimal: return "decimal";
    case Datatype::kDateTime: return "dateTime";
    case Datatype::kBoolean: return "boolean";
  }
  return "";
}

std::optional<Datatype> datatype_from_iri(std::string_view iri) {
  for (auto dt : {Datatype::kString, Datatype::kInteger, Datatype::kDecimal, Datatype::kDateTime,
                  Datatype::kBoolean}) {
    if (datatype_iri(dt) == iri) return dt;
  }
  return std::nullopt;
}

std::optional<Datatype> datatype_from_name(std::string_view name) {
  for (auto dt : {Datatype::kString, Datatype::kInteger, Datatype::kDecimal, Datatype::kDateTime,
                  Datatype::kBoolean}) {
    if (datatype_name(dt) == name) return dt;
  }
  return std::nullopt;
}

bool Literal::is_valid(std::string_view lex, Datatype dt) {
  switch (dt) {
    case Datatype::kString:
      return true;
    case Datatype::kInteger: {
      size_t i = (!lex.empty() && (lex[0] == '-' || lex[0] == '+')) ? 1 : 0;
      if (i >= lex.size()) return false;
      for (; i < lex.size(); ++i) {
        if (lex[i] < '0' || lex[i] > '9') return false;
      }
      return true;
    }
    case Datatype::kDecimal: {
      if (lex.empty()) return false;
      std::string_view body = lex[0] == '+' ? lex.substr(1) : lex;
      double v = 0;
      auto res = std::from_chars(body.data(), body.data() + body.size(), v);
      return res.ec == std::errc() && res.ptr == body.data() + body.size() && std::isfinite(v);
    }
    case Datatype::kDateTime:
      return try_parse_datetime(lex).has_value();
    case Datatype::kBoolean:
      return lex == "true" || lex == "false" || lex == "1" || lex == "0";
  }
  return false;
}

Literal Literal::make(std::string lexical, Datatype dt) {
  if (!is_valid(lexical, dt)) {
    throw_error(ErrorCode::kInvalidArgument, "literal '" + lexical + "' does not parse as " +
                                                 std::string(datatype_name(dt)));
  }
  return Literal{std::move(lexical), dt};
}

Term::Term(Iri iri) : kind_(Kind::kIri), value_(iri.str()) {}

Term::Term(Literal lit)
    : kind_(Kind::kLiteral), value_(std::move(lit.lexical)), datatype_(lit.datatype) {}

Iri Term::as_iri() const {
  if (!is_iri()) throw_error(ErrorCode::kInvalidArgument, "term is a literal, not an IRI");
  return Iri(value_);
}

Literal Term::as_literal() const {
  if (!is_literal()) throw_error(ErrorCode::kInvalidArgument, "term is an IRI, not a literal");
  return Literal{value_, datatype_};
}

namespace {

void append_escaped(std::string& out, std::string_view s) {
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
}

}  // namespace

std::string Term::to_nquads() const {
  std::string out;
  if (is_iri()) {
    out.reserve(value_.size() + 2);
    out.push_back('<');
    out += value_;
    out.push_back('>');
  } else {
    out.push_back('"');
    append_escaped(out, value_);
    out += "\"^^<";
    out += datatype_iri(datatype_);
    out.push_back('>');
  }
  return out;
}

std::strong_ordering operator<=>(const Term& a, const Term& b) {
  if (a.kind_ != b.kind_) return a.kind_ == Term::Kind::kIri ? std::strong_ordering::less
                                                           : std::strong_ordering::greater;
  if (auto c = a.value_.compare(b.value_); c != 0) {
    return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
  }
  return static_cast<int>(a.datatype_) <=> static_cast<int>(b.datatype_);
}

std::strong_ordering operator<=>(const Quad& a, const Quad& b) {
  if (auto c = a.subject <=> b.subject; c != 0) return c;
  if (auto c = a.predicate <=> b.predicate; c != 0) return c;
  if (auto c = a.object <=> b.object; c != 0) return c;
  return a.context <=> b.context;
}

Quad make_quad(std::string_view s, std::string_view p, Term o, std::string_view c) {
  return Quad{Iri(std::string(s)), Iri(std::string(p)), std::move(o), Iri(std::string(c))};
}

std::string to_nquads_line(const Quad& q) {
  std::string out;
  out.reserve(q.subject.str().size() + q.predicate.str().size() + q.object.value().size() +
              q.context.str().size() + 24);
  out.push_back('<');
  out += q.subject.str();
  out += "> <";
  out += q.predicate.str();
  out += "> ";
  out += q.object.to_nquads();
  out += " <";
  out += q.context.str();
  out += "> .";
  return out;
}

std::string to_nquads(const std::vector<Quad>& quads) {
  std::string out;
  for (const auto& q : quads) {
    out += to_nquads_line(q);
    out.push_back('\n');
  }
  return out;
}

namespace {

class LineParser {
 public:
  explicit LineParser(std::string_view line) : s_(line) {}

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw_error(ErrorCode::kParse, "N-Quads: " + why + " at column " + std::to_string(pos_ + 1) +
                                       " in: " + std::string(s_));
  }

  std::string iri() {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != '<') fail("expected '<'");
    auto end = s_.find('>', pos_ + 1);
    if (end == std::string_view::npos) fail("unterminated IRI");
    std::string v(s_.substr(pos_ + 1, end - pos_ - 1));
    pos_ = end + 1;
    if (!Iri::is_valid(v)) fail("malformed IRI '" + v + "'");
    return v;
  }

  Term term() {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == '<') return Term(Iri(iri()));
    if (pos_ >= s_.size() || s_[pos_] != '"') fail("expected IRI or literal");
    ++pos_;
    std::string lex;
    while (true) {
      if (pos_ >= s_.size()) fail("unterminated literal");
      char c = s_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (pos_ >= s_.size()) fail("dangling escape");
        char e = s_[pos_++];
        switch (e) {
          case '"': lex.push_back('"'); break;
          case '\\': lex.push_back('\\'); break;
          case 'n': lex.push_back('\n'); break;
          case 'r': lex.push_back('\r'); break;
          case 't': lex.push_back('\t'); break;
          default: fail(std::string("unknown escape \\") + e);
        }
      } else {
        lex.push_back(c);
      }
    }
    Datatype dt = Datatype::kString;
    if (s_.substr(pos_, 2) == "^^") {
      pos_ += 2;
      std::string dt_iri = iri();
      auto parsed = datatype_from_iri(dt_iri);
      if (!parsed) fail("unsupported datatype <" + dt_iri + ">");
      dt = *parsed;
    }
    if (!Literal::is_valid(lex, dt)) fail("literal does not parse under its datatype");
    return Term(Literal{std::move(lex), dt});
  }

  void end() {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != '.') fail("expected '.'");
    ++pos_;
    skip_ws();
    if (pos_ != s_.size()) fail("trailing characters");
  }

 private:
  std::string_view s_;
  size_t pos_ = 0;
};

}  // namespace

Quad parse_nquads_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  LineParser p(line);
  Quad q;
  q.subject = Iri(p.iri());
  q.predicate = Iri(p.iri());
  q.object = p.term();
  q.context = Iri(p.iri());
  p.end();
  return q;
}

std::vector<Quad> parse_nquads(std::string_view text) {
  std::vector<Quad> out;
  size_t start = 0;
  size_t lineno = 0;
  while (start <= text.size()) {
    size_t nl = text.find('\n', start);
    std::string_view line =
        text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    ++lineno;
    std::string t = trim(line);
    if (!t.empty() && t[0] != '#') {
      try {
        out.push_back(parse_nquads_line(line));
      } catch (const Error& e) {
        throw_error(ErrorCode::kParse, "line " + std::to_string(lineno) + ": " + e.what());
      }
    }
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return out;
}

size_t TermHash::operator()(const Term& t) const noexcept {
  size_t h = std::hash<std::string>{}(t.value());
  return h ^ (static_cast<size_t>(t.kind()) * 0x9e3779b97f4a7c15ULL) ^
         (static_cast<size_t>(t.datatype()) << 7);
}

}  // namespace km4

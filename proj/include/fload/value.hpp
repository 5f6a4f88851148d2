#pragma once

// Values of schema types and their canonical text form.
//
//   atomic     -> the token
//   string     -> elements separated by single spaces
//   composite  -> "(" c1 " ; " c2 " ; " ... ")"
//
// Tokens cannot contain whitespace or ( ) ; { }, so the canonical form is
// unambiguous given the type, and two values are equal iff their canonical
// forms are.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "fload/error.hpp"
#include "fload/schema.hpp"
#include "fload/text.hpp"

namespace fload {

class Value {
 public:
  enum class Kind { atomic, composite, string };

  Value() = default;

  static Value atomic(std::string token) {
    Value v;
    v.kind_ = Kind::atomic;
    v.token_ = std::move(token);
    return v;
  }
  static Value composite(std::vector<Value> components) {
    Value v;
    v.kind_ = Kind::composite;
    v.children_ = std::move(components);
    return v;
  }
  static Value string(std::vector<Value> elements) {
    Value v;
    v.kind_ = Kind::string;
    v.children_ = std::move(elements);
    return v;
  }

  Kind kind() const { return kind_; }
  bool is_atomic() const { return kind_ == Kind::atomic; }
  const std::string& token() const { return token_; }
  std::span<const Value> children() const { return children_; }
  const Value& child(std::size_t i) const { return children_.at(i); }
  std::size_t size() const { return children_.size(); }

  void append_canonical(std::string& out) const {
    switch (kind_) {
      case Kind::atomic:
        out += token_;
        break;
      case Kind::string:
        for (std::size_t i = 0; i < children_.size(); ++i) {
          if (i) out += ' ';
          children_[i].append_canonical(out);
        }
        break;
      case Kind::composite:
        out += '(';
        for (std::size_t i = 0; i < children_.size(); ++i) {
          if (i) out += " ; ";
          children_[i].append_canonical(out);
        }
        out += ')';
        break;
    }
  }

  std::string canonical() const {
    std::string out;
    append_canonical(out);
    return out;
  }

  friend bool operator==(const Value& a, const Value& b) {
    return a.canonical() == b.canonical();
  }
  friend bool operator<(const Value& a, const Value& b) {
    return a.canonical() < b.canonical();
  }

 private:
  Kind kind_ = Kind::atomic;
  std::string token_;
  std::vector<Value> children_;
};

inline std::string to_string(const Value& v) { return v.canonical(); }

/// Path of child indices from the root to an offending node.
struct Violation {
  std::vector<std::size_t> path;
  std::string rule;

  std::string describe() const {
    std::string p = "/";
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (i) p += '/';
      p += std::to_string(path[i]);
    }
    return p + ": " + rule;
  }
};

namespace detail {

inline void validate_into(const Schema& schema, const TypeRef& type,
                          const Value& value, std::vector<std::size_t>& path,
                          std::vector<Violation>& out) {
  if (type.string_of) {
    if (value.kind() != Value::Kind::string) {
      out.push_back({path, "expected a string of " + type.name});
      return;
    }
    if (value.size() == 0) {
      out.push_back({path, "empty string"});
      return;
    }
    const TypeRef elem{type.name, false};
    for (std::size_t i = 0; i < value.size(); ++i) {
      path.push_back(i);
      validate_into(schema, elem, value.child(i), path, out);
      path.pop_back();
    }
    return;
  }
  const TypeDef* def = schema.find(type.name);
  if (!def) {
    out.push_back({path, "unknown type '" + type.name + "'"});
    return;
  }
  if (const auto* atomic = std::get_if<AtomicType>(def)) {
    if (!value.is_atomic())
      out.push_back({path, "expected an atomic " + type.name + " token"});
    else if (!atomic->contains(value.token()))
      out.push_back({path, "token not in inventory: '" + value.token() +
                               "' is not a " + type.name});
    return;
  }
  const auto& comp = std::get<CompositeType>(*def);
  if (value.kind() != Value::Kind::composite) {
    out.push_back({path, "expected a composite " + type.name});
    return;
  }
  if (value.size() != comp.components.size()) {
    out.push_back({path, "arity mismatch: " + type.name + " has " +
                             std::to_string(comp.components.size()) +
                             " components, value has " +
                             std::to_string(value.size())});
    return;
  }
  for (std::size_t i = 0; i < value.size(); ++i) {
    path.push_back(i);
    validate_into(schema, comp.components[i].type, value.child(i), path, out);
    path.pop_back();
  }
}

/// Splits one line into words and the reserved punctuation ( ) ;.
class Lexer {
 public:
  enum class Kind { word, lparen, rparen, semi, end };
  struct Lexeme {
    Kind kind;
    std::string_view text;
    std::size_t column;  // 1-based
  };

  explicit Lexer(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size()) {
      const char c = line[i];
      if (text::is_space(c)) {
        ++i;
      } else if (c == '(' || c == ')' || c == ';') {
        items_.push_back({c == '(' ? Kind::lparen : c == ')' ? Kind::rparen
                                                             : Kind::semi,
                          line.substr(i, 1), i + 1});
        ++i;
      } else if (c == '{' || c == '}') {
        throw ParseError(std::string("unexpected '") + c + "'", 0, i + 1);
      } else {
        const std::size_t b = i;
        while (i < line.size() && !text::is_space(line[i]) &&
               !text::is_reserved(line[i]))
          ++i;
        items_.push_back({Kind::word, line.substr(b, i - b), b + 1});
      }
    }
    items_.push_back({Kind::end, {}, line.size() + 1});
  }

  const Lexeme& peek() const { return items_[pos_]; }
  Lexeme next() {
    const Lexeme l = items_[pos_];
    if (l.kind != Kind::end) ++pos_;
    return l;
  }
  bool done() const { return items_[pos_].kind == Kind::end; }

 private:
  std::vector<Lexeme> items_;
  std::size_t pos_ = 0;
};

class ValueReader {
 public:
  ValueReader(const Schema& schema, std::string_view line, std::size_t lineno)
      : schema_(schema), lineno_(lineno), lex_(lex(line, lineno)) {}

  Value read(const TypeRef& type) {
    if (type.string_of) {
      std::vector<Value> elems;
      const TypeRef elem{type.name, false};
      while (true) {
        const auto k = lex_.peek().kind;
        if (k == Lexer::Kind::end || k == Lexer::Kind::semi ||
            k == Lexer::Kind::rparen)
          break;
        elems.push_back(read(elem));
      }
      if (elems.empty()) fail("empty string of " + type.name);
      return Value::string(std::move(elems));
    }
    const TypeDef* def = schema_.find(type.name);
    if (!def) fail("unknown type '" + type.name + "'");
    if (std::holds_alternative<AtomicType>(*def)) {
      const auto l = lex_.peek();
      if (l.kind != Lexer::Kind::word) fail("expected a " + type.name + " token");
      lex_.next();
      return Value::atomic(std::string(l.text));
    }
    const auto& comp = std::get<CompositeType>(*def);
    expect(Lexer::Kind::lparen, "'(' opening a " + type.name);
    std::vector<Value> parts;
    for (std::size_t i = 0; i < comp.components.size(); ++i) {
      if (i) expect(Lexer::Kind::semi, "';' before component '" +
                                           comp.components[i].name + "'");
      parts.push_back(read(comp.components[i].type));
    }
    expect(Lexer::Kind::rparen, "')' closing a " + type.name);
    return Value::composite(std::move(parts));
  }

  bool done() const { return lex_.done(); }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, lineno_, lex_.peek().column);
  }

 private:
  static Lexer lex(std::string_view line, std::size_t lineno) {
    try {
      return Lexer(line);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineno, e.column());
    }
  }

  void expect(Lexer::Kind kind, const std::string& what) {
    if (lex_.peek().kind != kind) fail("expected " + what);
    lex_.next();
  }

  const Schema& schema_;
  std::size_t lineno_;
  Lexer lex_;
};

inline void require_type(const Schema& schema, std::string_view type_name) {
  if (!schema.has(type_name))
    throw InputError("unknown type '" + std::string(type_name) + "'");
}

inline std::string describe_violations(const std::vector<Violation>& vs) {
  std::string msg;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (i) msg += "; ";
    msg += vs[i].describe();
  }
  return msg;
}

}  // namespace detail

/// Empty result means the value is well-typed.
inline std::vector<Violation> validate_value(const Schema& schema,
                                             std::string_view type_name,
                                             const Value& value) {
  detail::require_type(schema, type_name);
  std::vector<Violation> out;
  std::vector<std::size_t> path;
  detail::validate_into(schema, TypeRef{std::string(type_name), false}, value,
                        path, out);
  return out;
}

/// Parses exactly one value of `type_name` from `text` and type-checks it.
inline Value parse_value(std::string_view text, const Schema& schema,
                         std::string_view type_name, std::size_t lineno = 1) {
  detail::require_type(schema, type_name);
  detail::ValueReader reader(schema, text, lineno);
  Value v = reader.read(TypeRef{std::string(type_name), false});
  if (!reader.done()) reader.fail("trailing input after value");
  if (auto vs = validate_value(schema, type_name, v); !vs.empty())
    throw ParseError("type violation at " + detail::describe_violations(vs),
                     lineno);
  return v;
}

/// Parses a whitespace-separated sequence of values of `type_name`.
inline std::vector<Value> parse_value_sequence(std::string_view text,
                                               const Schema& schema,
                                               std::string_view type_name,
                                               std::size_t lineno = 1) {
  detail::require_type(schema, type_name);
  detail::ValueReader reader(schema, text, lineno);
  const TypeRef type{std::string(type_name), false};
  std::vector<Value> out;
  while (!reader.done()) {
    out.push_back(reader.read(type));
    if (auto vs = validate_value(schema, type_name, out.back()); !vs.empty())
      throw ParseError("type violation in value " +
                           std::to_string(out.size()) + " at " +
                           detail::describe_violations(vs),
                       lineno);
  }
  return out;
}

}  // namespace fload

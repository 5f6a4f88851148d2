#pragma once

// Type system for linguistic objects: atomic types with finite inventories,
// composite types with a fixed list of components, and string-of types whose
// values are non-empty sequences of a single element type.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "fload/error.hpp"
#include "fload/text.hpp"

namespace fload {

/// Reference to a named type, optionally wrapped as `string<name>`.
struct TypeRef {
  std::string name;
  bool string_of = false;

  std::string to_string() const {
    return string_of ? "string<" + name + ">" : name;
  }
  friend bool operator==(const TypeRef&, const TypeRef&) = default;
};

class AtomicType {
 public:
  AtomicType() = default;
  explicit AtomicType(std::vector<std::string> inventory)
      : inventory_(std::move(inventory)),
        members_(inventory_.begin(), inventory_.end()) {}

  const std::vector<std::string>& inventory() const { return inventory_; }
  bool contains(const std::string& tok) const { return members_.count(tok) > 0; }

  friend bool operator==(const AtomicType& a, const AtomicType& b) {
    return a.inventory_ == b.inventory_;
  }

 private:
  std::vector<std::string> inventory_;
  std::unordered_set<std::string> members_;
};

struct Component {
  std::string name;
  TypeRef type;
  friend bool operator==(const Component&, const Component&) = default;
};

struct CompositeType {
  std::vector<Component> components;

  std::optional<std::size_t> index_of(std::string_view name) const {
    for (std::size_t i = 0; i < components.size(); ++i)
      if (components[i].name == name) return i;
    return std::nullopt;
  }
  friend bool operator==(const CompositeType&, const CompositeType&) = default;
};

using TypeDef = std::variant<AtomicType, CompositeType>;

/// Ordered collection of named type definitions. Construct through define()
/// followed by finalize(); parse_schema() does both.
class Schema {
 public:
  using Entry = std::pair<std::string, TypeDef>;

  /// Adds a definition after checking its local invariants.
  void define(std::string name, TypeDef def) {
    if (!text::valid_identifier(name))
      throw InputError("invalid type name '" + name + "'");
    if (index_.count(name))
      throw InputError("duplicate type name '" + name + "'");
    if (const auto* atomic = std::get_if<AtomicType>(&def)) {
      if (atomic->inventory().empty())
        throw InputError("atomic type '" + name + "' has an empty inventory");
      std::unordered_set<std::string> seen;
      for (const auto& tok : atomic->inventory()) {
        if (!text::valid_token(tok))
          throw InputError("invalid token '" + tok + "' in type '" + name + "'");
        if (!seen.insert(tok).second)
          throw InputError("duplicate token '" + tok + "' in type '" + name +
                           "'");
      }
    } else {
      const auto& comp = std::get<CompositeType>(def);
      if (comp.components.empty())
        throw InputError("composite type '" + name + "' has no components");
      std::unordered_set<std::string> seen;
      for (const auto& c : comp.components) {
        if (!text::valid_identifier(c.name))
          throw InputError("invalid component name '" + c.name + "' in type '" +
                           name + "'");
        if (!seen.insert(c.name).second)
          throw InputError("duplicate component name '" + c.name +
                           "' in type '" + name + "'");
      }
    }
    index_.emplace(name, entries_.size());
    entries_.emplace_back(std::move(name), std::move(def));
  }

  /// Checks that every reference resolves and that references are acyclic.
  /// Returns the name of the offending type with a message, or nullopt.
  std::optional<std::pair<std::string, std::string>> check() const {
    for (const auto& [name, def] : entries_) {
      if (const auto* comp = std::get_if<CompositeType>(&def))
        for (const auto& c : comp->components)
          if (!index_.count(c.type.name))
            return std::pair{name, "undefined type '" + c.type.name +
                                       "' referenced by '" + name + "'"};
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    std::vector<int> state(entries_.size(), 0);
    std::optional<std::pair<std::string, std::string>> cycle;
    auto visit = [&](auto&& self, std::size_t i) -> bool {
      if (state[i] == 2) return false;
      if (state[i] == 1) {
        cycle = std::pair{entries_[i].first, "cyclic type reference through '" +
                                                 entries_[i].first + "'"};
        return true;
      }
      state[i] = 1;
      if (const auto* comp = std::get_if<CompositeType>(&entries_[i].second))
        for (const auto& c : comp->components)
          if (self(self, index_.at(c.type.name))) return true;
      state[i] = 2;
      return false;
    };
    for (std::size_t i = 0; i < entries_.size(); ++i)
      if (visit(visit, i)) return cycle;
    return std::nullopt;
  }

  void finalize() const {
    if (auto err = check()) throw InputError(err->second);
  }

  const std::vector<Entry>& types() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  const TypeDef* find(std::string_view name) const {
    const auto it = index_.find(std::string(name));
    return it == index_.end() ? nullptr : &entries_[it->second].second;
  }
  bool has(std::string_view name) const { return find(name) != nullptr; }

  const AtomicType* atomic(std::string_view name) const {
    const auto* def = find(name);
    return def ? std::get_if<AtomicType>(def) : nullptr;
  }
  const CompositeType* composite(std::string_view name) const {
    const auto* def = find(name);
    return def ? std::get_if<CompositeType>(def) : nullptr;
  }

  const TypeDef& require(std::string_view name) const {
    const auto* def = find(name);
    if (!def) throw InputError("unknown type '" + std::string(name) + "'");
    return *def;
  }

  /// Copy with extra tokens appended to an atomic inventory (skipping tokens
  /// already present). Used to describe the image of a contrast.
  Schema with_added_tokens(std::string_view atomic_name,
                           const std::vector<std::string>& extra) const {
    Schema out = *this;
    auto& def = out.entries_.at(out.index_.at(std::string(atomic_name))).second;
    auto inv = std::get<AtomicType>(def).inventory();
    for (const auto& tok : extra)
      if (std::find(inv.begin(), inv.end(), tok) == inv.end()) inv.push_back(tok);
    def = AtomicType(std::move(inv));
    return out;
  }

  friend bool operator==(const Schema& a, const Schema& b) {
    return a.entries_ == b.entries_;
  }

 private:
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t> index_;
};

namespace detail {

inline TypeRef parse_type_ref(std::string_view s) {
  constexpr std::string_view prefix = "string<";
  if (s.substr(0, prefix.size()) == prefix) {
    if (s.size() <= prefix.size() + 1 || s.back() != '>')
      throw InputError("malformed string type '" + std::string(s) + "'");
    return {std::string(s.substr(prefix.size(), s.size() - prefix.size() - 1)),
            true};
  }
  if (!text::valid_identifier(s))
    throw InputError("malformed type reference '" + std::string(s) + "'");
  return {std::string(s), false};
}

}  // namespace detail

/// Parses the line-oriented schema format:
///   atomic <name> = <tok> <tok> ...
///   composite <name> = <comp>:<type> <comp>:<type> ...
inline Schema parse_schema(std::string_view doc) {
  Schema schema;
  std::map<std::string, std::size_t> line_of;
  const auto lines = text::split_lines(doc);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::size_t lineno = ln + 1;
    const auto body = text::trim(text::strip_comment(lines[ln]));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw ParseError("expected '<kind> <name> = ...'", lineno);
    const auto head = text::split_ws(body.substr(0, eq));
    const auto rhs = text::split_ws(body.substr(eq + 1));
    if (head.size() != 2)
      throw ParseError("expected '<kind> <name> = ...'", lineno);
    const std::string name(head[1]);
    try {
      if (head[0] == "atomic") {
        std::vector<std::string> inv(rhs.begin(), rhs.end());
        schema.define(name, AtomicType(std::move(inv)));
      } else if (head[0] == "composite") {
        CompositeType comp;
        for (auto item : rhs) {
          const auto colon = item.find(':');
          if (colon == std::string_view::npos)
            throw InputError("expected '<component>:<type>', got '" +
                             std::string(item) + "'");
          comp.components.push_back({std::string(item.substr(0, colon)),
                                     detail::parse_type_ref(item.substr(colon + 1))});
        }
        schema.define(name, std::move(comp));
      } else {
        throw InputError("unknown definition kind '" + std::string(head[0]) +
                         "'");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const InputError& e) {
      throw ParseError(e.what(), lineno);
    }
    line_of.emplace(name, lineno);
  }
  if (auto err = schema.check()) throw ParseError(err->second, line_of[err->first]);
  return schema;
}

inline std::string serialize_schema(const Schema& schema) {
  std::string out;
  for (const auto& [name, def] : schema.types()) {
    if (const auto* atomic = std::get_if<AtomicType>(&def)) {
      out += "atomic " + name + " =";
      for (const auto& tok : atomic->inventory()) out += " " + tok;
    } else {
      out += "composite " + name + " =";
      for (const auto& c : std::get<CompositeType>(def).components)
        out += " " + c.name + ":" + c.type.to_string();
    }
    out += '\n';
  }
  return out;
}

}  // namespace fload

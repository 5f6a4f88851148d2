#pragma once

// Contrasts as deterministic object-to-object maps. A ContrastSpec is an
// ordered list of rewrite rules; applying it erases the contrast from a
// value. Two values are indistinguishable without the contrast iff the spec
// maps them to the same value.
//
// Rule kinds:
//   Relabel  replaces guarded atomic tokens by the label of their class
//   Insert   puts a token between each adjacent (after, before) pair
//   Delete   removes guarded occurrences of a token
//
// Each rule is one left-to-right pass; guards and insertion sites are read
// from the value as it was before the pass.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "fload/corpus.hpp"
#include "fload/error.hpp"
#include "fload/schema.hpp"
#include "fload/text.hpp"
#include "fload/value.hpp"

namespace fload {

// Guard predicates.
struct SiblingEquals {
  std::string component;
  std::string token;
};
struct StringInitial {};
struct StringFinal {};
struct OutermostInitial {};
struct LeftNeighborIn {
  std::set<std::string> tokens;
};
struct RightNeighborIn {
  std::set<std::string> tokens;
};

using Predicate = std::variant<SiblingEquals, StringInitial, StringFinal,
                               OutermostInitial, LeftNeighborIn, RightNeighborIn>;

/// Conjunction of predicates; empty means always true.
struct Guard {
  std::vector<Predicate> predicates;

  bool empty() const { return predicates.empty(); }
  std::string to_string() const;
};

struct PartitionClass {
  std::vector<std::string> members;  // sorted
  std::string label;
};

/// Non-singleton classes over one atomic type. Unlisted tokens map to
/// themselves.
class Partition {
 public:
  Partition() = default;
  Partition(std::string atomic_type, std::vector<PartitionClass> classes)
      : atomic_type_(std::move(atomic_type)), classes_(std::move(classes)) {
    for (const auto& c : classes_)
      for (const auto& m : c.members) label_of_.emplace(m, c.label);
  }

  const std::string& atomic_type() const { return atomic_type_; }
  const std::vector<PartitionClass>& classes() const { return classes_; }

  /// Label for a token in a listed class, or nullptr.
  const std::string* label_of(const std::string& tok) const {
    const auto it = label_of_.find(tok);
    return it == label_of_.end() ? nullptr : &it->second;
  }

  /// Sorted members joined with '+'.
  static std::string default_label(const std::vector<std::string>& sorted_members) {
    return text::join(sorted_members, "+");
  }

 private:
  std::string atomic_type_;
  std::vector<PartitionClass> classes_;
  std::map<std::string, std::string> label_of_;
};

/// A string-of-atomic component of a composite type, e.g. syl.phones.
struct StringHost {
  std::string composite_type;
  std::string component;
  std::size_t index = 0;
  std::string element_type;  // atomic
};

struct Relabel {
  Partition partition;
  Guard guard;
};
struct Insert {
  std::string token;
  StringHost host;
  std::string after;
  std::string before;
};
struct Delete {
  std::string token;
  StringHost host;
  Guard guard;
};

using Rule = std::variant<Relabel, Insert, Delete>;

struct ContrastSpec {
  SchemaPtr schema;
  std::string object_type;
  std::vector<Rule> rules;
  std::string id;

  /// Schema describing mapped values: same shapes, with class labels added
  /// to the relabelled atomic inventories.
  Schema image_schema() const {
    Schema out = *schema;
    for (const auto& r : rules)
      if (const auto* rel = std::get_if<Relabel>(&r)) {
        std::vector<std::string> labels;
        for (const auto& c : rel->partition.classes()) labels.push_back(c.label);
        out = out.with_added_tokens(rel->partition.atomic_type(), labels);
      }
    return out;
  }
};

inline std::string Guard::to_string() const {
  std::string out;
  auto set_str = [](const std::set<std::string>& s) {
    return "{" + text::join(std::vector<std::string>(s.begin(), s.end()), " ") + "}";
  };
  for (std::size_t i = 0; i < predicates.size(); ++i) {
    if (i) out += " & ";
    std::visit(
        [&](const auto& p) {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, SiblingEquals>)
            out += p.component + "=" + p.token;
          else if constexpr (std::is_same_v<P, StringInitial>)
            out += "string-initial";
          else if constexpr (std::is_same_v<P, StringFinal>)
            out += "string-final";
          else if constexpr (std::is_same_v<P, OutermostInitial>)
            out += "outermost-initial";
          else if constexpr (std::is_same_v<P, LeftNeighborIn>)
            out += "left-in " + set_str(p.tokens);
          else
            out += "right-in " + set_str(p.tokens);
        },
        predicates[i]);
  }
  return out;
}

/// Contrast file text for a spec; parse_contrast() reads it back.
inline std::string serialize_contrast(const ContrastSpec& spec) {
  std::string out;
  for (const auto& rule : spec.rules) {
    if (const auto* rel = std::get_if<Relabel>(&rule)) {
      out += "partition " + rel->partition.atomic_type() + " :";
      for (const auto& c : rel->partition.classes()) {
        out += " {" + text::join(c.members, " ") + "}";
        if (c.label != Partition::default_label(c.members)) out += " as " + c.label;
      }
      if (!rel->guard.empty()) out += " when " + rel->guard.to_string();
    } else if (const auto* ins = std::get_if<Insert>(&rule)) {
      out += "insert " + ins->token + " in " + ins->host.composite_type + "." +
             ins->host.component + " after " + ins->after + " before " + ins->before;
    } else {
      const auto& del = std::get<Delete>(rule);
      out += "delete " + del.token + " in " + del.host.composite_type + "." +
             del.host.component;
      if (!del.guard.empty()) out += " when " + del.guard.to_string();
    }
    out += '\n';
  }
  return out;
}

namespace detail {

/// One ancestor on the path from the root to the node being rewritten.
struct Frame {
  const Value* node;
  const CompositeType* composite;  // null for strings
  std::size_t index;               // child we descended into
};

inline const Frame* innermost_string(const std::vector<Frame>& stack) {
  for (auto it = stack.rbegin(); it != stack.rend(); ++it)
    if (!it->composite) return &*it;
  return nullptr;
}

inline bool neighbor_in(const Frame* f, std::ptrdiff_t offset,
                        const std::set<std::string>& tokens) {
  if (!f) return false;
  const auto j = static_cast<std::ptrdiff_t>(f->index) + offset;
  if (j < 0 || j >= static_cast<std::ptrdiff_t>(f->node->size())) return false;
  const Value& nb = f->node->child(static_cast<std::size_t>(j));
  return nb.is_atomic() && tokens.count(nb.token()) > 0;
}

/// Evaluates a guard for the node at stack.back().node->child(stack.back().index).
inline bool holds(const Guard& guard, const std::vector<Frame>& stack) {
  for (const auto& pred : guard.predicates) {
    const bool ok = std::visit(
        [&](const auto& p) -> bool {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, SiblingEquals>) {
            for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
              if (!it->composite) continue;
              if (const auto idx = it->composite->index_of(p.component)) {
                const Value& sib = it->node->child(*idx);
                return sib.is_atomic() && sib.token() == p.token;
              }
            }
            return false;
          } else if constexpr (std::is_same_v<P, StringInitial>) {
            const Frame* f = innermost_string(stack);
            return f && f->index == 0;
          } else if constexpr (std::is_same_v<P, StringFinal>) {
            const Frame* f = innermost_string(stack);
            return f && f->index + 1 == f->node->size();
          } else if constexpr (std::is_same_v<P, OutermostInitial>) {
            bool any = false;
            for (const auto& f : stack) {
              if (f.composite) continue;
              if (f.index != 0) return false;
              any = true;
            }
            return any;
          } else if constexpr (std::is_same_v<P, LeftNeighborIn>) {
            return neighbor_in(innermost_string(stack), -1, p.tokens);
          } else {
            return neighbor_in(innermost_string(stack), +1, p.tokens);
          }
        },
        pred);
    if (!ok) return false;
  }
  return true;
}

inline std::string path_of(const std::vector<Frame>& stack) {
  std::string p = "/";
  for (std::size_t i = 0; i < stack.size(); ++i) {
    if (i) p += '/';
    p += std::to_string(stack[i].index);
  }
  return p;
}

class RulePass {
 public:
  RulePass(const Schema& schema, const Rule& rule) : schema_(schema), rule_(rule) {}

  Value run(const Value& root, const std::string& type) {
    stack_.clear();
    return visit(root, TypeRef{type, false});
  }

 private:
  Value visit(const Value& v, const TypeRef& type) {
    if (type.string_of) {
      const TypeRef elem{type.name, false};
      std::vector<Value> out;
      out.reserve(v.size());
      stack_.push_back({&v, nullptr, 0});
      for (std::size_t i = 0; i < v.size(); ++i) {
        stack_.back().index = i;
        out.push_back(visit(v.child(i), elem));
      }
      stack_.pop_back();
      return Value::string(std::move(out));
    }
    const TypeDef& def = schema_.require(type.name);
    if (std::holds_alternative<AtomicType>(def)) {
      if (const auto* rel = std::get_if<Relabel>(&rule_)) {
        if (type.name == rel->partition.atomic_type())
          if (const auto* label = rel->partition.label_of(v.token()))
            if (holds(rel->guard, stack_)) return Value::atomic(*label);
      }
      return v;
    }
    const auto& comp = std::get<CompositeType>(def);
    const StringHost* host = nullptr;
    if (const auto* ins = std::get_if<Insert>(&rule_)) host = &ins->host;
    if (const auto* del = std::get_if<Delete>(&rule_)) host = &del->host;
    std::vector<Value> parts;
    parts.reserve(v.size());
    stack_.push_back({&v, &comp, 0});
    for (std::size_t i = 0; i < v.size(); ++i) {
      stack_.back().index = i;
      if (host && host->composite_type == type.name && host->index == i)
        parts.push_back(rewrite_host(v.child(i)));
      else
        parts.push_back(visit(v.child(i), comp.components[i].type));
    }
    stack_.pop_back();
    return Value::composite(std::move(parts));
  }

  Value rewrite_host(const Value& str) {
    const auto& elems = str.children();
    std::vector<Value> out;
    if (const auto* ins = std::get_if<Insert>(&rule_)) {
      out.reserve(elems.size() + 1);
      for (std::size_t i = 0; i < elems.size(); ++i) {
        out.push_back(elems[i]);
        if (i + 1 < elems.size() && elems[i].token() == ins->after &&
            elems[i + 1].token() == ins->before)
          out.push_back(Value::atomic(ins->token));
      }
      return Value::string(std::move(out));
    }
    const auto& del = std::get<Delete>(rule_);
    stack_.push_back({&str, nullptr, 0});
    for (std::size_t i = 0; i < elems.size(); ++i) {
      stack_.back().index = i;
      if (elems[i].token() == del.token && holds(del.guard, stack_)) continue;
      out.push_back(elems[i]);
    }
    stack_.pop_back();
    if (out.empty())
      throw DomainError("deleting '" + del.token + "' empties the string at " +
                        path_of(stack_));
    return Value::string(std::move(out));
  }

  const Schema& schema_;
  const Rule& rule_;
  std::vector<Frame> stack_;
};

}  // namespace detail

/// Applies every rule in order. The value must be well-typed as
/// spec.object_type.
inline Value apply_contrast(const ContrastSpec& spec, const Value& value) {
  Value cur = value;
  for (const auto& rule : spec.rules) {
    detail::RulePass pass(*spec.schema, rule);
    cur = pass.run(cur, spec.object_type);
  }
  return cur;
}

inline TokenStreamCorpus apply_to_corpus(const ContrastSpec& spec,
                                         const TokenStreamCorpus& corpus,
                                         unsigned jobs = 1) {
  if (corpus.object_type != spec.object_type)
    throw InputError("contrast targets '" + spec.object_type + "' but corpus holds '" +
                     corpus.object_type + "'");
  const auto image = std::make_shared<const Schema>(spec.image_schema());
  TokenStreamCorpus out{image, corpus.object_type,
                        std::vector<std::vector<Value>>(corpus.utterances.size())};
  auto map_range = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      auto& dst = out.utterances[i];
      dst.reserve(corpus.utterances[i].size());
      for (const auto& v : corpus.utterances[i]) dst.push_back(apply_contrast(spec, v));
    }
  };
  const std::size_t n = corpus.utterances.size();
  if (jobs <= 1 || n < 2) {
    map_range(0, n);
    return out;
  }
  const std::size_t workers = std::min<std::size_t>(jobs, n);
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> threads;
    for (std::size_t w = 0; w < workers; ++w)
      threads.emplace_back([&, w] {
        try {
          map_range(n * w / workers, n * (w + 1) / workers);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

/// Maps every entry; weights of entries that collide are summed.
inline WeightedLexicon apply_to_corpus(const ContrastSpec& spec,
                                       const WeightedLexicon& lexicon) {
  if (lexicon.object_type != spec.object_type)
    throw InputError("contrast targets '" + spec.object_type + "' but lexicon holds '" +
                     lexicon.object_type + "'");
  WeightedLexicon out{std::make_shared<const Schema>(spec.image_schema()),
                      lexicon.object_type, {}};
  for (const auto& [key, entry] : lexicon.entries) {
    Value mapped = apply_contrast(spec, entry.value);
    auto mkey = mapped.canonical();
    auto it = out.entries.find(mkey);
    if (it == out.entries.end())
      out.entries.emplace(std::move(mkey), LexiconEntry{std::move(mapped), entry.weight});
    else
      it->second.weight += entry.weight;
  }
  return out;
}

namespace detail {

/// Number of string levels above occurrences of `target` inside values of
/// `type`; the maximum over all occurrences, or nullopt when `target` cannot
/// occur.
inline std::optional<std::size_t> string_depth(const Schema& schema,
                                               const std::string& type,
                                               const std::string& target) {
  if (type == target) return 0;
  const auto* comp = schema.composite(type);
  if (!comp) return std::nullopt;
  std::optional<std::size_t> best;
  for (const auto& c : comp->components) {
    if (auto d = string_depth(schema, c.type.name, target)) {
      const std::size_t depth = *d + (c.type.string_of ? 1 : 0);
      if (!best || depth > *best) best = depth;
    }
  }
  return best;
}

/// Lexemes of a contrast-file line: words, braces, and `&` outside braces.
struct RuleLexeme {
  enum class Kind { word, lbrace, rbrace, amp, end } kind;
  std::string text;
  std::size_t column;
};

inline std::vector<RuleLexeme> lex_rule_line(std::string_view line, std::size_t lineno) {
  std::vector<RuleLexeme> out;
  bool in_braces = false;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (text::is_space(c)) {
      ++i;
    } else if (c == '{' || c == '}') {
      if ((c == '{') == in_braces)
        throw ParseError(std::string("unbalanced '") + c + "'", lineno, i + 1);
      in_braces = c == '{';
      out.push_back({c == '{' ? RuleLexeme::Kind::lbrace : RuleLexeme::Kind::rbrace,
                     std::string(1, c), i + 1});
      ++i;
    } else if (c == '&' && !in_braces) {
      out.push_back({RuleLexeme::Kind::amp, "&", i + 1});
      ++i;
    } else if (c == '(' || c == ')' || c == ';') {
      throw ParseError(std::string("unexpected '") + c + "'", lineno, i + 1);
    } else {
      const std::size_t b = i;
      while (i < line.size() && !text::is_space(line[i]) && !text::is_reserved(line[i]) &&
             !(line[i] == '&' && !in_braces))
        ++i;
      out.push_back({RuleLexeme::Kind::word, std::string(line.substr(b, i - b)), b + 1});
    }
  }
  if (in_braces) throw ParseError("unclosed '{'", lineno, line.size() + 1);
  out.push_back({RuleLexeme::Kind::end, "", line.size() + 1});
  return out;
}

class RuleParser {
 public:
  RuleParser(const Schema& current, const std::string& object_type,
             std::string_view line, std::size_t lineno)
      : schema_(current),
        object_type_(object_type),
        lineno_(lineno),
        lex_(lex_rule_line(line, lineno)) {}

  Rule parse() {
    const auto kw = expect_word("rule keyword");
    Rule rule;
    if (kw == "partition")
      rule = parse_partition();
    else if (kw == "insert")
      rule = parse_insert();
    else if (kw == "delete")
      rule = parse_delete();
    else
      fail_at(pos_ - 1, "unknown rule '" + kw + "'");
    if (peek().kind != RuleLexeme::Kind::end) fail("unexpected '" + peek().text + "'");
    return rule;
  }

 private:
  using K = RuleLexeme::Kind;

  const RuleLexeme& peek() const { return lex_[pos_]; }
  const RuleLexeme& next() {
    const auto& l = lex_[pos_];
    if (l.kind != K::end) ++pos_;
    return l;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, lineno_, peek().column);
  }
  [[noreturn]] void fail_at(std::size_t pos, const std::string& msg) const {
    throw ParseError(msg, lineno_, lex_[pos].column);
  }
  std::string expect_word(const std::string& what) {
    if (peek().kind != K::word) fail("expected " + what);
    return next().text;
  }
  void expect_keyword(const std::string& kw) {
    if (peek().kind != K::word || peek().text != kw) fail("expected '" + kw + "'");
    next();
  }
  std::vector<std::string> token_set() {
    if (peek().kind != K::lbrace) fail("expected '{'");
    next();
    std::vector<std::string> toks;
    while (peek().kind == K::word) toks.push_back(next().text);
    if (peek().kind != K::rbrace) fail("expected '}'");
    next();
    return toks;
  }

  const AtomicType& atomic_or_fail(const std::string& name, std::size_t at) const {
    const auto* a = schema_.atomic(name);
    if (!a) fail_at(at, "'" + name + "' is not an atomic type");
    return *a;
  }

  void require_member(const AtomicType& type, const std::string& type_name,
                      const std::string& tok, std::size_t at) const {
    if (!type.contains(tok))
      fail_at(at, "unknown token '" + tok + "' for type '" + type_name + "'");
  }

  void require_occurs(const std::string& atomic, std::size_t at) const {
    if (!string_depth(schema_, object_type_, atomic))
      fail_at(at, "type '" + atomic + "' does not occur in '" + object_type_ + "'");
  }

  Rule parse_partition() {
    const std::size_t type_pos = pos_;
    const auto type = expect_word("atomic type name");
    const auto& atomic = atomic_or_fail(type, type_pos);
    require_occurs(type, type_pos);
    if (peek().kind != K::word || peek().text != ":") fail("expected ':'");
    next();
    std::vector<PartitionClass> classes;
    std::set<std::string> used, labels;
    while (peek().kind == K::lbrace) {
      const std::size_t at = pos_;
      auto members = token_set();
      for (const auto& m : members) {
        require_member(atomic, type, m, at);
        if (!used.insert(m).second)
          fail_at(at, "token '" + m + "' appears in more than one class");
      }
      std::sort(members.begin(), members.end());
      if (members.size() < 2) fail_at(at, "a partition class needs at least two tokens");
      std::string label = Partition::default_label(members);
      if (peek().kind == K::word && peek().text == "as") {
        next();
        label = expect_word("class label");
      }
      if (!text::valid_token(label)) fail_at(at, "invalid class label '" + label + "'");
      const bool member = std::binary_search(members.begin(), members.end(), label);
      if (atomic.contains(label) && !member)
        fail_at(at, "class label '" + label + "' is already a token of '" + type + "'");
      if (!labels.insert(label).second)
        fail_at(at, "class label '" + label + "' used twice");
      classes.push_back({std::move(members), std::move(label)});
    }
    if (classes.empty()) fail("expected at least one '{...}' class");
    Guard guard;
    if (peek().kind == K::word && peek().text == "when") {
      next();
      guard = parse_guard(type);
    }
    return Relabel{Partition(type, std::move(classes)), std::move(guard)};
  }

  StringHost parse_host() {
    const std::size_t at = pos_;
    const auto spec = expect_word("<type>.<component>");
    const auto dot = spec.find('.');
    if (dot == std::string::npos) fail_at(at, "expected <type>.<component>");
    StringHost host{spec.substr(0, dot), spec.substr(dot + 1), 0, {}};
    const auto* comp = schema_.composite(host.composite_type);
    if (!comp) fail_at(at, "'" + host.composite_type + "' is not a composite type");
    const auto idx = comp->index_of(host.component);
    if (!idx) fail_at(at, "'" + host.composite_type + "' has no component '" +
                              host.component + "'");
    const auto& ref = comp->components[*idx].type;
    if (!ref.string_of || !schema_.atomic(ref.name))
      fail_at(at, "'" + spec + "' is not a string of an atomic type");
    if (!string_depth(schema_, object_type_, host.composite_type))
      fail_at(at, "type '" + host.composite_type + "' does not occur in '" +
                      object_type_ + "'");
    host.index = *idx;
    host.element_type = ref.name;
    return host;
  }

  Rule parse_insert() {
    const std::size_t tok_pos = pos_;
    auto tok = expect_word("token to insert");
    expect_keyword("in");
    auto host = parse_host();
    expect_keyword("after");
    const std::size_t after_pos = pos_;
    auto after = expect_word("left context token");
    expect_keyword("before");
    const std::size_t before_pos = pos_;
    auto before = expect_word("right context token");
    const auto& elem = *schema_.atomic(host.element_type);
    require_member(elem, host.element_type, tok, tok_pos);
    require_member(elem, host.element_type, after, after_pos);
    require_member(elem, host.element_type, before, before_pos);
    return Insert{std::move(tok), std::move(host), std::move(after), std::move(before)};
  }

  Rule parse_delete() {
    const std::size_t tok_pos = pos_;
    auto tok = expect_word("token to delete");
    expect_keyword("in");
    auto host = parse_host();
    require_member(*schema_.atomic(host.element_type), host.element_type, tok, tok_pos);
    Guard guard;
    if (peek().kind == K::word && peek().text == "when") {
      next();
      guard = parse_guard(host.element_type);
    }
    return Delete{std::move(tok), std::move(host), std::move(guard)};
  }

  // `target` is the atomic type whose occurrences the guard is evaluated at.
  Guard parse_guard(const std::string& target) {
    Guard g;
    while (true) {
      const std::size_t at = pos_;
      const auto word = expect_word("guard predicate");
      if (word == "string-initial") {
        g.predicates.emplace_back(StringInitial{});
      } else if (word == "string-final") {
        g.predicates.emplace_back(StringFinal{});
      } else if (word == "outermost-initial") {
        const auto depth = string_depth(schema_, object_type_, target);
        if (!depth || *depth < 2)
          fail_at(at, "outermost-initial needs '" + target +
                          "' nested inside an enclosing string of '" + object_type_ +
                          "'");
        g.predicates.emplace_back(OutermostInitial{});
      } else if (word == "left-in" || word == "right-in") {
        const auto& atomic = *schema_.atomic(target);
        const std::size_t set_pos = pos_;
        std::set<std::string> toks;
        for (auto& t : token_set()) {
          require_member(atomic, target, t, set_pos);
          toks.insert(std::move(t));
        }
        if (word == "left-in")
          g.predicates.emplace_back(LeftNeighborIn{std::move(toks)});
        else
          g.predicates.emplace_back(RightNeighborIn{std::move(toks)});
      } else if (const auto eq = word.find('='); eq != std::string::npos) {
        SiblingEquals p{word.substr(0, eq), word.substr(eq + 1)};
        bool found = false;
        for (const auto& [name, def] : schema_.types()) {
          const auto* comp = std::get_if<CompositeType>(&def);
          if (!comp) continue;
          const auto idx = comp->index_of(p.component);
          if (!idx) continue;
          const auto& ref = comp->components[*idx].type;
          const auto* atomic = schema_.atomic(ref.name);
          if (!ref.string_of && atomic && atomic->contains(p.token)) found = true;
        }
        if (!found)
          fail_at(at, "no atomic component '" + p.component + "' accepting '" + p.token +
                          "'");
        g.predicates.emplace_back(std::move(p));
      } else {
        fail_at(at, "malformed guard '" + word + "'");
      }
      if (peek().kind != K::amp) break;
      next();
    }
    return g;
  }

  const Schema& schema_;
  const std::string& object_type_;
  std::size_t lineno_;
  std::vector<RuleLexeme> lex_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses a contrast file. Tokens named by later rules are checked against
/// the inventories as extended by earlier relabelling rules.
inline ContrastSpec parse_contrast(std::string_view doc, SchemaPtr schema,
                                   std::string_view object_type, std::string id = {}) {
  detail::require_type(*schema, object_type);
  ContrastSpec spec{schema, std::string(object_type), {}, std::move(id)};
  Schema current = *schema;
  const auto lines = text::split_lines(doc);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const auto body = text::trim(text::strip_comment(lines[ln]));
    if (body.empty()) continue;
    detail::RuleParser parser(current, spec.object_type, body, ln + 1);
    spec.rules.push_back(parser.parse());
    if (const auto* rel = std::get_if<Relabel>(&spec.rules.back())) {
      std::vector<std::string> labels;
      for (const auto& c : rel->partition.classes()) labels.push_back(c.label);
      current = current.with_added_tokens(rel->partition.atomic_type(), labels);
    }
  }
  return spec;
}

/// Spec merging exactly {x, y} of an atomic type.
inline ContrastSpec pair_contrast(SchemaPtr schema, std::string_view object_type,
                                  std::string_view atomic_type, const std::string& x,
                                  const std::string& y) {
  if (x == y) throw InputError("a binary opposition needs two distinct tokens");
  const auto* atomic = schema->atomic(atomic_type);
  if (!atomic) throw InputError("'" + std::string(atomic_type) + "' is not an atomic type");
  for (const auto* t : {&x, &y})
    if (!atomic->contains(*t))
      throw InputError("unknown token '" + *t + "' for type '" + std::string(atomic_type) +
                       "'");
  if (!detail::string_depth(*schema, std::string(object_type), std::string(atomic_type)))
    throw InputError("type '" + std::string(atomic_type) + "' does not occur in '" +
                     std::string(object_type) + "'");
  std::vector<std::string> members{x, y};
  std::sort(members.begin(), members.end());
  auto label = Partition::default_label(members);
  if (atomic->contains(label))
    throw InputError("class label '" + label + "' is already a token");
  ContrastSpec spec{schema, std::string(object_type), {}, members[0] + "/" + members[1]};
  spec.rules.emplace_back(Relabel{
      Partition(std::string(atomic_type), {PartitionClass{members, std::move(label)}}), {}});
  return spec;
}

/// One spec per unordered pair of `subset`, pairs in lexicographic order.
inline std::vector<ContrastSpec> binary_oppositions(SchemaPtr schema,
                                                    std::string_view atomic_type,
                                                    const std::vector<std::string>& subset,
                                                    std::string_view object_type = {}) {
  if (object_type.empty()) object_type = atomic_type;
  const auto* atomic = schema->atomic(atomic_type);
  if (!atomic) throw InputError("'" + std::string(atomic_type) + "' is not an atomic type");
  std::set<std::string> uniq;
  for (const auto& t : subset) {
    if (!atomic->contains(t))
      throw InputError("token '" + t + "' is not in the inventory of '" +
                       std::string(atomic_type) + "'");
    uniq.insert(t);
  }
  if (uniq.size() < 2) throw InputError("need at least two distinct tokens");
  const std::vector<std::string> toks(uniq.begin(), uniq.end());
  std::vector<ContrastSpec> out;
  out.reserve(toks.size() * (toks.size() - 1) / 2);
  for (std::size_t i = 0; i < toks.size(); ++i)
    for (std::size_t j = i + 1; j < toks.size(); ++j)
      out.push_back(pair_contrast(schema, object_type, atomic_type, toks[i], toks[j]));
  return out;
}

}  // namespace fload

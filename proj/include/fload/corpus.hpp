#pragma once

// Corpora (token streams and weighted lexicons) and n-gram count tables.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "fload/error.hpp"
#include "fload/schema.hpp"
#include "fload/text.hpp"
#include "fload/value.hpp"

namespace fload {

using SchemaPtr = std::shared_ptr<const Schema>;

/// One utterance per line of input; n-grams never cross utterances.
struct TokenStreamCorpus {
  SchemaPtr schema;
  std::string object_type;
  std::vector<std::vector<Value>> utterances;

  std::size_t object_count() const {
    std::size_t n = 0;
    for (const auto& u : utterances) n += u.size();
    return n;
  }
};

struct LexiconEntry {
  Value value;
  double weight = 0.0;
};

/// Values with positive weights, keyed by canonical form.
struct WeightedLexicon {
  SchemaPtr schema;
  std::string object_type;
  std::map<std::string, LexiconEntry> entries;

  /// Throws on a duplicate key or a non-positive weight.
  void insert(Value value, double weight) {
    if (!(weight > 0.0) || !std::isfinite(weight))
      throw InputError("lexicon weights must be positive and finite");
    auto key = value.canonical();
    if (entries.count(key)) throw InputError("duplicate lexicon entry '" + key + "'");
    entries.emplace(std::move(key), LexiconEntry{std::move(value), weight});
  }

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

namespace detail {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace detail

using NGram = std::vector<std::string>;

/// Counts of contiguous n-grams of canonical values. Keys are kept in
/// canonical (lexicographic) order.
class NGramTable {
 public:
  explicit NGramTable(std::size_t n) : n_(n) {
    if (n == 0) throw InputError("n-gram order must be at least 1");
  }

  std::size_t order() const { return n_; }

  void add(const NGram& key, double count) {
    if (key.size() != n_)
      throw std::invalid_argument("n-gram key has wrong length");
    if (!(count >= 0.0)) throw std::invalid_argument("negative n-gram count");
    counts_[key] += count;
  }

  void merge(const NGramTable& other) {
    if (other.n_ != n_) throw std::invalid_argument("merging tables of different order");
    for (const auto& [k, c] : other.counts_) counts_[k] += c;
  }

  const std::map<NGram, double>& counts() const { return counts_; }

  double count(const NGram& key) const {
    const auto it = counts_.find(key);
    return it == counts_.end() ? 0.0 : it->second;
  }

  /// Number of keys with a positive count.
  std::size_t distinct() const {
    return static_cast<std::size_t>(std::count_if(
        counts_.begin(), counts_.end(), [](const auto& kv) { return kv.second > 0; }));
  }

  /// Sum of counts, accumulated in key order.
  double total() const {
    detail::CompensatedSum s;
    for (const auto& kv : counts_) s.add(kv.second);
    return s.value();
  }

  friend bool operator==(const NGramTable& a, const NGramTable& b) {
    return a.n_ == b.n_ && a.counts_ == b.counts_;
  }

 private:
  std::size_t n_;
  std::map<NGram, double> counts_;
};

namespace detail {

inline void count_utterance(const std::vector<Value>& utt, NGramTable& table) {
  const std::size_t n = table.order();
  if (utt.size() < n) return;
  std::vector<std::string> canon;
  canon.reserve(utt.size());
  for (const auto& v : utt) canon.push_back(v.canonical());
  NGram key(n);
  for (std::size_t i = 0; i + n <= canon.size(); ++i) {
    std::copy(canon.begin() + static_cast<std::ptrdiff_t>(i),
              canon.begin() + static_cast<std::ptrdiff_t>(i + n), key.begin());
    table.add(key, 1.0);
  }
}

}  // namespace detail

/// Counts n-grams within each utterance. With jobs > 1 the utterances are
/// split into contiguous chunks counted on separate threads; counts are
/// integers, so the merged table is identical to the sequential one.
inline NGramTable count_ngrams(const TokenStreamCorpus& corpus, std::size_t n,
                               unsigned jobs = 1) {
  NGramTable table(n);
  const auto& utts = corpus.utterances;
  if (jobs <= 1 || utts.size() < 2) {
    for (const auto& u : utts) detail::count_utterance(u, table);
    return table;
  }
  const std::size_t workers = std::min<std::size_t>(jobs, utts.size());
  std::vector<NGramTable> partial(workers, NGramTable(n));
  {
    std::vector<std::jthread> threads;
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        const std::size_t lo = utts.size() * w / workers;
        const std::size_t hi = utts.size() * (w + 1) / workers;
        for (std::size_t i = lo; i < hi; ++i)
          detail::count_utterance(utts[i], partial[w]);
      });
    }
  }
  for (const auto& p : partial) table.merge(p);
  return table;
}

/// Unigram table whose counts are the lexicon weights.
inline NGramTable lexicon_to_table(const WeightedLexicon& lexicon) {
  if (lexicon.empty()) throw InputError("empty lexicon");
  NGramTable table(1);
  for (const auto& [key, entry] : lexicon.entries) table.add({key}, entry.weight);
  return table;
}

/// One utterance per non-blank line; `#` starts a comment.
inline TokenStreamCorpus parse_token_stream(std::string_view doc, SchemaPtr schema,
                                            std::string_view object_type) {
  detail::require_type(*schema, object_type);
  TokenStreamCorpus corpus{schema, std::string(object_type), {}};
  const auto lines = text::split_lines(doc);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const auto body = text::strip_comment(lines[ln]);
    if (text::trim(body).empty()) continue;
    corpus.utterances.push_back(
        parse_value_sequence(body, *schema, object_type, ln + 1));
  }
  return corpus;
}

namespace detail {

inline double parse_weight(std::string_view s, std::size_t lineno) {
  s = text::trim(s);
  double w = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, w);
  if (s.empty() || ec != std::errc() || ptr != end)
    throw ParseError("malformed weight '" + std::string(s) + "'", lineno, 1);
  if (!(w > 0.0) || !std::isfinite(w))
    throw ParseError("weight must be positive, got '" + std::string(s) + "'",
                     lineno, 1);
  return w;
}

}  // namespace detail

/// Lines of `<weight> TAB <canonical value>`.
inline WeightedLexicon parse_weighted_lexicon(std::string_view doc, SchemaPtr schema,
                                              std::string_view object_type) {
  detail::require_type(*schema, object_type);
  WeightedLexicon lex{schema, std::string(object_type), {}};
  const auto lines = text::split_lines(doc);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::size_t lineno = ln + 1;
    const auto body = text::strip_comment(lines[ln]);
    if (text::trim(body).empty()) continue;
    const auto tab = body.find('\t');
    if (tab == std::string_view::npos)
      throw ParseError("expected '<weight><TAB><value>'", lineno);
    const double w = detail::parse_weight(body.substr(0, tab), lineno);
    Value v = parse_value(body.substr(tab + 1), *schema, object_type, lineno);
    try {
      lex.insert(std::move(v), w);
    } catch (const InputError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return lex;
}

/// Word key -> pronunciation.
using Pronunciations = std::map<std::string, Value>;

/// Lines of `<key> TAB <canonical value>`; one pronunciation per key.
inline Pronunciations parse_pronunciations(std::string_view doc, const Schema& schema,
                                           std::string_view object_type) {
  detail::require_type(schema, object_type);
  Pronunciations out;
  const auto lines = text::split_lines(doc);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::size_t lineno = ln + 1;
    const auto body = text::strip_comment(lines[ln]);
    if (text::trim(body).empty()) continue;
    const auto tab = body.find('\t');
    if (tab == std::string_view::npos)
      throw ParseError("expected '<key><TAB><value>'", lineno);
    const std::string key(text::trim(body.substr(0, tab)));
    if (!text::valid_token(key)) throw ParseError("invalid key '" + key + "'", lineno, 1);
    Value v = parse_value(body.substr(tab + 1), schema, object_type, lineno);
    if (!out.emplace(key, std::move(v)).second)
      throw ParseError("duplicate pronunciation for '" + key + "'", lineno, 1);
  }
  return out;
}

/// Reads raw whitespace-separated word keys, one utterance per line. The
/// corpus gets a one-type schema: atomic `key` over the observed tokens.
inline TokenStreamCorpus parse_key_stream(std::string_view doc) {
  std::vector<std::vector<std::string>> raw;
  std::set<std::string> seen;
  for (const auto line : text::split_lines(doc)) {
    const auto words = text::split_ws(text::strip_comment(line));
    if (words.empty()) continue;
    auto& utt = raw.emplace_back();
    for (auto w : words) {
      if (!text::valid_token(w))
        throw InputError("invalid word key '" + std::string(w) + "'");
      utt.emplace_back(w);
      seen.emplace(w);
    }
  }
  auto schema = std::make_shared<Schema>();
  if (!seen.empty()) {
    schema->define("key", AtomicType(std::vector<std::string>(seen.begin(), seen.end())));
  } else {
    schema->define("key", AtomicType({"_"}));
  }
  TokenStreamCorpus corpus{schema, "key", {}};
  for (auto& utt : raw) {
    auto& out = corpus.utterances.emplace_back();
    for (auto& w : utt) out.push_back(Value::atomic(std::move(w)));
  }
  return corpus;
}

enum class MissPolicy { skip, error };

struct JoinResult {
  TokenStreamCorpus corpus;
  std::size_t misses = 0;
  std::vector<std::string> missing_keys;  // distinct, sorted
};

/// Replaces each word key by its pronunciation, keeping utterance order.
/// Utterances left empty by skipped keys are dropped.
inline JoinResult join_lexicon(const TokenStreamCorpus& keys,
                               const Pronunciations& pronunciations,
                               SchemaPtr target_schema, std::string_view target_type,
                               MissPolicy policy) {
  if (!keys.schema || !keys.schema->atomic(keys.object_type))
    throw InputError("join_lexicon needs a key stream over an atomic type");
  detail::require_type(*target_schema, target_type);
  JoinResult result{{target_schema, std::string(target_type), {}}, 0, {}};
  std::set<std::string> missing;
  for (const auto& utt : keys.utterances) {
    std::vector<Value> out;
    out.reserve(utt.size());
    for (const auto& k : utt) {
      const auto it = pronunciations.find(k.token());
      if (it == pronunciations.end()) {
        if (policy == MissPolicy::error)
          throw InputError("no pronunciation for key '" + k.token() + "'");
        ++result.misses;
        missing.insert(k.token());
        continue;
      }
      out.push_back(it->second);
    }
    if (!out.empty()) result.corpus.utterances.push_back(std::move(out));
  }
  result.missing_keys.assign(missing.begin(), missing.end());
  return result;
}

}  // namespace fload

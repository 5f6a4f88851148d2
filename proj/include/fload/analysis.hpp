#pragma once

// Analyses built on the FL estimator: pairwise FL matrices, the consistency
// correlation between two FL measures, and the FL of a single phoneme as an
// expectation over its possible mergers.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <exception>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "fload/contrast.hpp"
#include "fload/corpus.hpp"
#include "fload/error.hpp"
#include "fload/infotheory.hpp"
#include "fload/text.hpp"

namespace fload {

struct FLMatrixEntry {
  std::string x;  // x < y
  std::string y;
  double fl = 0.0;
  FLReport report;
};

struct FLMatrix {
  std::string atomic_type;
  std::vector<std::string> subset;  // sorted, distinct
  std::size_t n = 0;
  std::vector<FLMatrixEntry> entries;  // lexicographic pair order

  const FLMatrixEntry* find(const std::string& a, const std::string& b) const {
    const auto& [x, y] = std::minmax(a, b);
    for (const auto& e : entries)
      if (e.x == x && e.y == y) return &e;
    return nullptr;
  }
};

namespace detail {

/// Runs body(i) for i in [0, count) on up to `jobs` threads. Exceptions are
/// rethrown in index order.
template <typename Body>
void parallel_for(std::size_t count, unsigned jobs, Body&& body) {
  if (jobs <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(jobs, count);
  std::vector<std::exception_ptr> errors(count);
  {
    std::vector<std::jthread> threads;
    for (std::size_t w = 0; w < workers; ++w)
      threads.emplace_back([&, w] {
        for (std::size_t i = w; i < count; i += workers) {
          try {
            body(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

/// FL of every binary opposition over `subset`.
inline FLMatrix fl_matrix(const TokenStreamCorpus& corpus, std::string_view atomic_type,
                          const std::vector<std::string>& subset, std::size_t n,
                          unsigned jobs = 1) {
  const auto specs =
      binary_oppositions(corpus.schema, atomic_type, subset, corpus.object_type);
  const auto before = entropy(count_ngrams(corpus, n, jobs));
  if (!(before.raw_bits > 0.0))
    throw DomainError("degenerate corpus: zero entropy before removing the contrast");

  FLMatrix m;
  m.atomic_type = std::string(atomic_type);
  const std::set<std::string> uniq(subset.begin(), subset.end());
  m.subset.assign(uniq.begin(), uniq.end());
  m.n = n;
  m.entries.resize(specs.size());
  detail::parallel_for(specs.size(), jobs, [&](std::size_t i) {
    const auto& spec = specs[i];
    const auto& cls = std::get<Relabel>(spec.rules.front()).partition.classes().front();
    const auto after = entropy(count_ngrams(apply_to_corpus(spec, corpus), n));
    auto report = detail::make_fl_report(spec, before, after);
    m.entries[i] = FLMatrixEntry{cls.members[0], cls.members[1], report.fl, std::move(report)};
  });
  return m;
}

/// Fraction of matrix entries strictly smaller than the entry for {a, b}.
inline double rank_entry(const FLMatrix& matrix, const std::string& a, const std::string& b) {
  const auto* e = matrix.find(a, b);
  if (!e) throw InputError("pair {" + a + ", " + b + "} is not in the matrix");
  const auto smaller = std::count_if(matrix.entries.begin(), matrix.entries.end(),
                                     [&](const FLMatrixEntry& o) { return o.fl < e->fl; });
  return static_cast<double>(smaller) / static_cast<double>(matrix.entries.size());
}

/// Sample Pearson correlation.
inline double consistency_alpha(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size())
    throw InputError("consistency_alpha needs equally long inputs");
  if (xs.size() < 3) throw InputError("consistency_alpha needs at least three contrasts");
  const auto mean = [](const std::vector<double>& v) {
    detail::CompensatedSum s;
    for (double x : v) s.add(x);
    return s.value() / static_cast<double>(v.size());
  };
  const double mx = mean(xs), my = mean(ys);
  detail::CompensatedSum sxy, sxx, syy;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxy.add(dx * dy);
    sxx.add(dx * dx);
    syy.add(dy * dy);
  }
  if (!(sxx.value() > 0.0) || !(syy.value() > 0.0))
    throw DomainError("correlation undefined: an input has zero variance");
  const double r = sxy.value() / std::sqrt(sxx.value() * syy.value());
  return std::clamp(r, -1.0, 1.0);
}

struct ConsistencyNote {
  double alpha = 0.0;
  double threshold = 0.9;
  bool consistent = false;
};

/// Annotates alpha against a rule-of-thumb threshold (0.9 by default).
inline ConsistencyNote annotate_consistency(double alpha, double threshold = 0.9) {
  return {alpha, threshold, alpha > threshold};
}

/// x -> S(x), plus optional explicit merger probabilities P(x, y).
struct SimilarityModel {
  std::map<std::string, std::vector<std::string>> similar;
  std::map<std::pair<std::string, std::string>, double> weights;

  bool explicit_weights() const { return !weights.empty(); }

  /// Throws unless every weight names a y in S(x) and each x's weights sum
  /// to 1 within 1e-9.
  void check() const {
    for (const auto& [xy, w] : weights) {
      const auto it = similar.find(xy.first);
      if (it == similar.end() ||
          std::find(it->second.begin(), it->second.end(), xy.second) == it->second.end())
        throw InputError("weight for " + xy.first + " " + xy.second + " but " + xy.second +
                         " is not in S(" + xy.first + ")");
      if (!(w >= 0.0) || w > 1.0)
        throw InputError("weight for " + xy.first + " " + xy.second + " is outside [0, 1]");
    }
    if (!explicit_weights()) return;
    for (const auto& [x, ys] : similar) {
      if (ys.empty()) continue;
      detail::CompensatedSum s;
      for (const auto& y : ys) {
        const auto it = weights.find({x, y});
        if (it != weights.end()) s.add(it->second);
      }
      if (std::abs(s.value() - 1.0) > 1e-9)
        throw InputError("weights for S(" + x + ") sum to " + std::to_string(s.value()) +
                         ", not 1");
    }
  }
};

/// Lines `similar <x> : <y> <y> ...` and `weight <x> <y> = <p>`.
inline SimilarityModel parse_similarity_model(std::string_view doc,
                                              const AtomicType* inventory = nullptr) {
  SimilarityModel model;
  const auto lines = text::split_lines(doc);
  auto known = [&](std::string_view tok, std::size_t lineno) {
    if (!text::valid_token(tok)) throw ParseError("invalid token '" + std::string(tok) + "'", lineno);
    if (inventory && !inventory->contains(std::string(tok)))
      throw ParseError("unknown token '" + std::string(tok) + "'", lineno);
  };
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::size_t lineno = ln + 1;
    const auto words = text::split_ws(text::strip_comment(lines[ln]));
    if (words.empty()) continue;
    if (words[0] == "similar") {
      if (words.size() < 3 || words[2] != ":")
        throw ParseError("expected 'similar <x> : <y> ...'", lineno);
      const std::string x(words[1]);
      known(x, lineno);
      if (model.similar.count(x)) throw ParseError("duplicate similarity set for '" + x + "'", lineno);
      std::vector<std::string> ys;
      for (std::size_t i = 3; i < words.size(); ++i) {
        const std::string y(words[i]);
        known(y, lineno);
        if (y == x) throw ParseError("S(" + x + ") must not contain " + x, lineno);
        if (std::find(ys.begin(), ys.end(), y) != ys.end())
          throw ParseError("'" + y + "' listed twice in S(" + x + ")", lineno);
        ys.push_back(y);
      }
      model.similar.emplace(x, std::move(ys));
    } else if (words[0] == "weight") {
      if (words.size() != 5 || words[3] != "=")
        throw ParseError("expected 'weight <x> <y> = <p>'", lineno);
      const std::string x(words[1]), y(words[2]);
      known(x, lineno);
      known(y, lineno);
      double p = 0.0;
      const auto w = words[4];
      const auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), p);
      if (ec != std::errc() || ptr != w.data() + w.size())
        throw ParseError("malformed weight '" + std::string(w) + "'", lineno);
      if (!model.weights.emplace(std::pair{x, y}, p).second)
        throw ParseError("duplicate weight for " + x + " " + y, lineno);
    } else {
      throw ParseError("unknown directive '" + std::string(words[0]) + "'", lineno);
    }
  }
  try {
    model.check();
  } catch (const InputError& e) {
    throw InputError(std::string("similarity model: ") + e.what());
  }
  return model;
}

/// Occurrences of each token of `atomic_type` anywhere in the corpus.
inline std::map<std::string, double> token_frequencies(const TokenStreamCorpus& corpus,
                                                       const std::string& atomic_type) {
  std::map<std::string, double> freq;
  const Schema& schema = *corpus.schema;
  auto walk = [&](auto&& self, const Value& v, const TypeRef& t) -> void {
    if (t.string_of) {
      const TypeRef elem{t.name, false};
      for (const auto& c : v.children()) self(self, c, elem);
      return;
    }
    if (t.name == atomic_type) {
      freq[v.token()] += 1.0;
      return;
    }
    if (const auto* comp = schema.composite(t.name))
      for (std::size_t i = 0; i < v.size(); ++i) self(self, v.child(i), comp->components[i].type);
  };
  const TypeRef root{corpus.object_type, false};
  for (const auto& utt : corpus.utterances)
    for (const auto& v : utt) walk(walk, v, root);
  return freq;
}

struct MergerTerm {
  std::string y;
  double weight = 0.0;  // P(x, y)
  double fl = 0.0;      // FL(x, y)
};

struct PhonemeFL {
  std::string x;
  double fl = 0.0;
  std::vector<MergerTerm> terms;  // sorted by y
  bool empty_similarity_set = false;
};

/// Expected FL of x over its mergers with each y in S(x). In frequency mode
/// P(x, y) is proportional to the frequency of y in `reference` (the corpus
/// itself when null).
inline PhonemeFL single_phoneme_fl(const TokenStreamCorpus& corpus,
                                   std::string_view atomic_type, const std::string& x,
                                   const SimilarityModel& model, std::size_t n,
                                   const TokenStreamCorpus* reference = nullptr,
                                   unsigned jobs = 1) {
  PhonemeFL out;
  out.x = x;
  const auto it = model.similar.find(x);
  if (it == model.similar.end() || it->second.empty()) {
    out.empty_similarity_set = true;
    return out;
  }
  std::vector<std::string> ys = it->second;
  std::sort(ys.begin(), ys.end());

  std::vector<double> weights;
  if (model.explicit_weights()) {
    for (const auto& y : ys) {
      const auto w = model.weights.find({x, y});
      weights.push_back(w == model.weights.end() ? 0.0 : w->second);
    }
  } else {
    const auto freq = token_frequencies(reference ? *reference : corpus, std::string(atomic_type));
    detail::CompensatedSum total;
    for (const auto& y : ys) {
      const auto f = freq.find(y);
      weights.push_back(f == freq.end() ? 0.0 : f->second);
      total.add(weights.back());
    }
    if (!(total.value() > 0.0))
      throw DomainError("no member of S(" + x + ") occurs in the reference corpus");
    for (auto& w : weights) w /= total.value();
  }

  out.terms.resize(ys.size());
  detail::parallel_for(ys.size(), jobs, [&](std::size_t i) {
    const auto spec = pair_contrast(corpus.schema, corpus.object_type, atomic_type, x, ys[i]);
    out.terms[i] = MergerTerm{ys[i], weights[i], functional_load(corpus, spec, n).fl};
  });
  detail::CompensatedSum sum;
  for (const auto& t : out.terms) sum.add(t.weight * t.fl);
  out.fl = sum.value();
  return out;
}

}  // namespace fload

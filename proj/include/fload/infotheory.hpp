#pragma once

// Entropy of n-gram distributions, the functional-load estimator and cohort
// statistics. All logarithms are base 2.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fload/contrast.hpp"
#include "fload/corpus.hpp"
#include "fload/error.hpp"

namespace fload {

/// -sum p log2 p over p = count / sum(counts). Zero counts contribute
/// nothing. Terms are summed in ascending count order, so the result depends
/// only on the multiset of counts.
inline double entropy_bits(std::vector<double> counts) {
  std::sort(counts.begin(), counts.end());
  detail::CompensatedSum total;
  for (double c : counts) total.add(c);
  const double t = total.value();
  if (!(t > 0.0)) throw DomainError("degenerate corpus: entropy of an empty distribution");
  detail::CompensatedSum h;
  for (double c : counts) {
    if (c <= 0.0) continue;
    const double p = c / t;
    h.add(-p * std::log2(p));
  }
  // Rounding can leave a one-key distribution at -0.0 or a few ulps off.
  return std::max(0.0, h.value());
}

struct EntropyEstimate {
  std::size_t n = 0;
  double raw_bits = 0.0;  // H(D_n)
  double rate = 0.0;      // H(D_n) / n, bits per object
  double total = 0.0;
  std::size_t distinct = 0;
};

inline EntropyEstimate entropy(const NGramTable& table) {
  std::vector<double> counts;
  counts.reserve(table.counts().size());
  for (const auto& kv : table.counts()) counts.push_back(kv.second);
  const double total = table.total();
  if (!(total > 0.0))
    throw DomainError("degenerate corpus: no " + std::to_string(table.order()) +
                      "-grams to estimate from");
  EntropyEstimate e;
  e.n = table.order();
  e.raw_bits = entropy_bits(std::move(counts));
  e.rate = e.raw_bits / static_cast<double>(e.n);
  e.total = total;
  e.distinct = table.distinct();
  return e;
}

struct FLReport {
  std::string contrast_id;
  std::size_t n = 0;
  double h_before = 0.0;  // bits per object
  double h_after = 0.0;   // bits per object
  double fl = 0.0;
  EntropyEstimate before;
  EntropyEstimate after;
};

namespace detail {

inline FLReport make_fl_report(const ContrastSpec& spec, const EntropyEstimate& before,
                               const EntropyEstimate& after) {
  if (!(before.raw_bits > 0.0))
    throw DomainError("degenerate corpus: zero entropy before removing the contrast");
  FLReport r;
  r.contrast_id = spec.id;
  r.n = before.n;
  r.before = before;
  r.after = after;
  r.h_before = before.rate;
  r.h_after = after.rate;
  r.fl = (before.rate - after.rate) / before.rate;
  return r;
}

}  // namespace detail

/// Relative entropy-rate drop at order n when the contrast is removed.
inline FLReport functional_load(const TokenStreamCorpus& corpus, const ContrastSpec& spec,
                                std::size_t n, unsigned jobs = 1) {
  const auto before = entropy(count_ngrams(corpus, n, jobs));
  if (!(before.raw_bits > 0.0))
    throw DomainError("degenerate corpus: zero entropy before removing the contrast");
  const auto merged = apply_to_corpus(spec, corpus, jobs);
  const auto after = entropy(count_ngrams(merged, n, jobs));
  return detail::make_fl_report(spec, before, after);
}

/// Order-1 functional load over a weighted lexicon.
inline FLReport functional_load(const WeightedLexicon& lexicon, const ContrastSpec& spec,
                                std::size_t n = 1) {
  if (n != 1) throw InputError("weighted lexicons only support n = 1");
  if (lexicon.empty()) throw DomainError("degenerate corpus: empty lexicon");
  const auto before = entropy(lexicon_to_table(lexicon));
  if (!(before.raw_bits > 0.0))
    throw DomainError("degenerate corpus: zero entropy before removing the contrast");
  const auto after = entropy(lexicon_to_table(apply_to_corpus(spec, lexicon)));
  return detail::make_fl_report(spec, before, after);
}

/// Pairwise opposition of two atomic values in a corpus of atomic objects.
inline FLReport hockett_fl(const TokenStreamCorpus& corpus, const std::string& x,
                           const std::string& y, std::size_t n, unsigned jobs = 1) {
  if (x == y) throw InputError("hockett_fl needs two distinct values");
  if (!corpus.schema->atomic(corpus.object_type))
    throw InputError("hockett_fl needs a corpus of atomic objects");
  const auto spec =
      pair_contrast(corpus.schema, corpus.object_type, corpus.object_type, x, y);
  return functional_load(corpus, spec, n, jobs);
}

struct Cohort {
  std::string key;                   // canonical mapped value
  std::vector<std::string> members;  // canonical source values, sorted
  double probability = 0.0;          // P(C)
  double entropy = 0.0;              // H(C)
};

struct CohortReport {
  std::size_t word_count = 0;
  std::size_t cohort_count = 0;
  double shipman_avg_size = 0.0;
  double huttenlocher_expected_size = 0.0;
  double carter_expected_entropy = 0.0;
  double h_w = 0.0;
  double h_w_theta = 0.0;
  std::optional<double> pie;  // percent; undefined when H(W) = 0
  double identity_residual = 0.0;  // |carter - (H(W) - H(W_theta))|
  std::vector<Cohort> cohorts;     // sorted by key
};

/// Groups lexicon words into cohorts of values the contrast maps together.
inline CohortReport cohort_analysis(const WeightedLexicon& lexicon, const ContrastSpec& spec) {
  if (lexicon.empty()) throw DomainError("degenerate corpus: empty lexicon");
  if (lexicon.object_type != spec.object_type)
    throw InputError("contrast targets '" + spec.object_type + "' but lexicon holds '" +
                     lexicon.object_type + "'");
  struct Group {
    std::vector<std::string> members;
    std::vector<double> weights;
  };
  std::map<std::string, Group> groups;
  std::vector<double> all;
  for (const auto& [key, entry] : lexicon.entries) {
    auto& g = groups[apply_contrast(spec, entry.value).canonical()];
    g.members.push_back(key);
    g.weights.push_back(entry.weight);
    all.push_back(entry.weight);
  }
  detail::CompensatedSum total_sum;
  for (double w : all) total_sum.add(w);
  const double total = total_sum.value();

  CohortReport r;
  r.word_count = lexicon.size();
  r.cohort_count = groups.size();
  r.h_w = entropy_bits(all);
  std::vector<double> cohort_weights;
  detail::CompensatedSum hutt, carter;
  for (auto& [key, g] : groups) {
    detail::CompensatedSum ws;
    for (double w : g.weights) ws.add(w);
    Cohort c;
    c.key = key;
    c.members = std::move(g.members);
    c.probability = ws.value() / total;
    c.entropy = entropy_bits(g.weights);
    cohort_weights.push_back(ws.value());
    hutt.add(c.probability * static_cast<double>(c.members.size()));
    carter.add(c.probability * c.entropy);
    r.cohorts.push_back(std::move(c));
  }
  r.shipman_avg_size =
      static_cast<double>(r.word_count) / static_cast<double>(r.cohort_count);
  r.huttenlocher_expected_size = hutt.value();
  r.carter_expected_entropy = carter.value();
  r.h_w_theta = entropy_bits(std::move(cohort_weights));
  if (r.h_w > 0.0) r.pie = 100.0 * r.h_w_theta / r.h_w;
  r.identity_residual = std::abs(r.carter_expected_entropy - (r.h_w - r.h_w_theta));
  return r;
}

}  // namespace fload

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>

#include "fload/infotheory.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace fload;

namespace {

ContrastSpec toy_bc() {
  return parse_contrast("partition toy : {b c}", fixtures::toy_schema(), "toy");
}

WeightedLexicon bat_pat_cat() {
  return parse_weighted_lexicon(
      "4\t((b ae t ; primary))\n2\t((p ae t ; primary))\n2\t((k ae t ; primary))\n",
      fixtures::word_schema(), "wrd");
}

}  // namespace

TEST(Entropy, ToyBigrams) {
  const auto e = entropy(count_ngrams(fixtures::toy_corpus(), 2));
  EXPECT_NEAR(e.raw_bits, 2.7108, 1e-4);
  EXPECT_NEAR(e.rate, 1.3554, 1e-4);
  EXPECT_EQ(e.total, 18.0);
  EXPECT_EQ(e.distinct, 7u);
}

TEST(Entropy, UniformAndSingleKey) {
  NGramTable uniform(1);
  for (const char* k : {"a", "b", "c", "d"}) uniform.add({k}, 3.0);
  EXPECT_EQ(entropy(uniform).raw_bits, 2.0);
  NGramTable one(2);
  one.add({"a", "b"}, 5.0);
  EXPECT_EQ(entropy(one).raw_bits, 0.0);
  EXPECT_THROW(entropy(NGramTable(1)), DomainError);
}

TEST(Entropy, ZeroCountsContributeNothing) {
  NGramTable t(1);
  t.add({"a"}, 1.0);
  t.add({"b"}, 1.0);
  t.add({"c"}, 0.0);
  EXPECT_EQ(entropy(t).raw_bits, 1.0);
  EXPECT_EQ(entropy(t).distinct, 2u);
}

TEST(FunctionalLoad, ToyExample) {
  const auto r = functional_load(fixtures::toy_corpus(), toy_bc(), 2);
  // Brute force over the merged counts (aa 2)(ad 7)(da 6)(dd 3).
  const double merged = oracle::entropy(std::map<std::string, long>{
      {"aa", 2}, {"ad", 7}, {"da", 6}, {"dd", 3}});
  EXPECT_NEAR(merged, 1.8413, 1e-4);
  EXPECT_NEAR(r.before.raw_bits, 2.7108, 1e-4);
  EXPECT_NEAR(r.after.raw_bits, merged, 1e-12);
  EXPECT_NEAR(r.fl, 0.3208, 1e-3);
  EXPECT_NEAR(r.fl, (2.7107770844150676 - 1.8412501702815547) / 2.7107770844150676, 1e-12);
  EXPECT_EQ(r.n, 2u);
}

TEST(FunctionalLoad, IdentityAndFullMerge) {
  const auto c = fixtures::toy_corpus();
  const auto identity = parse_contrast("", fixtures::toy_schema(), "toy");
  const auto all = parse_contrast("partition toy : {a b c}", fixtures::toy_schema(), "toy");
  for (std::size_t n = 1; n <= 4; ++n) {
    EXPECT_EQ(functional_load(c, identity, n).fl, 0.0);
    EXPECT_EQ(functional_load(c, all, n).fl, 1.0);
  }
}

TEST(FunctionalLoad, DegenerateCorpus) {
  const auto spec = toy_bc();
  EXPECT_THROW(functional_load(parse_token_stream("", fixtures::toy_schema(), "toy"), spec, 1),
               DomainError);
  EXPECT_THROW(functional_load(parse_token_stream("a a a", fixtures::toy_schema(), "toy"), spec, 1),
               DomainError);
  EXPECT_THROW(functional_load(parse_token_stream("a b", fixtures::toy_schema(), "toy"), spec, 3),
               DomainError);
}

TEST(FunctionalLoad, Lexicon) {
  const auto lex = bat_pat_cat();
  const auto spec = parse_contrast("partition phn : {b p}", fixtures::word_schema(), "wrd");
  const auto r = functional_load(lex, spec);
  EXPECT_NEAR(r.h_before, 1.5, 1e-15);
  EXPECT_NEAR(r.fl, (1.5 - 0.8112781244591328) / 1.5, 1e-12);
  EXPECT_THROW(functional_load(lex, spec, 2), InputError);
}

TEST(Hockett, MatchesFunctionalLoad) {
  const auto c = fixtures::toy_corpus();
  const auto h = hockett_fl(c, "b", "c", 2);
  const auto f = functional_load(c, toy_bc(), 2);
  EXPECT_EQ(h.fl, f.fl);
  EXPECT_EQ(h.h_before, f.h_before);
  EXPECT_EQ(h.h_after, f.h_after);
  EXPECT_EQ(hockett_fl(c, "c", "b", 2).fl, f.fl);
}

TEST(Hockett, AbsentSymbolAndSamePair) {
  const auto schema = std::make_shared<const Schema>(parse_schema("atomic toy = a b c y"));
  std::string line;
  for (const char* p = fixtures::kToyCorpus; *p; ++p) line += std::string(1, *p) + " ";
  const auto c = parse_token_stream(line, schema, "toy");
  for (std::size_t n = 1; n <= 3; ++n) EXPECT_EQ(hockett_fl(c, "a", "y", n).fl, 0.0);
  EXPECT_THROW(hockett_fl(c, "a", "a", 1), InputError);
}

TEST(Cohorts, BatPatCat) {
  const auto spec = parse_contrast("partition phn : {b p}", fixtures::word_schema(), "wrd");
  const auto r = cohort_analysis(bat_pat_cat(), spec);
  EXPECT_EQ(r.cohort_count, 2u);
  EXPECT_DOUBLE_EQ(r.shipman_avg_size, 1.5);
  EXPECT_DOUBLE_EQ(r.huttenlocher_expected_size, 1.75);
  EXPECT_DOUBLE_EQ(r.h_w, 1.5);
  EXPECT_NEAR(r.h_w_theta, 0.8113, 1e-4);
  EXPECT_NEAR(r.carter_expected_entropy, 0.6887, 1e-4);
  ASSERT_TRUE(r.pie.has_value());
  EXPECT_NEAR(*r.pie, 54.09, 0.01);
  EXPECT_LT(r.identity_residual, 1e-12);
  ASSERT_EQ(r.cohorts.size(), 2u);
  EXPECT_EQ(r.cohorts[0].members.size(), 2u);
}

TEST(Cohorts, IdentityAndFullMerge) {
  const auto schema = fixtures::word_schema();
  const auto lex = bat_pat_cat();
  const auto id = cohort_analysis(lex, parse_contrast("", schema, "wrd"));
  EXPECT_EQ(id.cohort_count, 3u);
  EXPECT_EQ(id.carter_expected_entropy, 0.0);
  EXPECT_DOUBLE_EQ(*id.pie, 100.0);

  const auto all = cohort_analysis(lex, parse_contrast("partition phn : {b p k}", schema, "wrd"));
  EXPECT_EQ(all.cohort_count, 1u);
  EXPECT_EQ(all.h_w_theta, 0.0);
  EXPECT_EQ(*all.pie, 0.0);
  EXPECT_DOUBLE_EQ(all.carter_expected_entropy, all.h_w);
}

TEST(Cohorts, DegenerateLexicon) {
  const auto schema = fixtures::word_schema();
  const auto one = parse_weighted_lexicon("3\t((b ae t ; primary))\n", schema, "wrd");
  const auto r = cohort_analysis(one, parse_contrast("", schema, "wrd"));
  EXPECT_FALSE(r.pie.has_value());
  EXPECT_EQ(r.shipman_avg_size, 1.0);
  EXPECT_THROW(cohort_analysis(WeightedLexicon{schema, "wrd", {}}, parse_contrast("", schema, "wrd")),
               DomainError);
}

namespace {

WeightedLexicon random_lexicon(std::mt19937_64& rng, fload::SchemaPtr schema, std::size_t k) {
  WeightedLexicon lex{schema, "w", {}};
  std::uniform_real_distribution<double> weight(0.01, 100.0);
  const std::size_t size = 1 + rng() % 50;
  while (lex.size() < size) {
    std::vector<Value> phones;
    const std::size_t len = 1 + rng() % 4;
    for (std::size_t i = 0; i < len; ++i) phones.push_back(Value::atomic("s" + std::to_string(rng() % k)));
    const auto v = Value::composite({Value::string(std::move(phones))});
    if (!lex.entries.count(v.canonical())) lex.insert(v, weight(rng));
  }
  return lex;
}

fload::SchemaPtr string_word_schema(std::size_t k) {
  std::string def = "atomic sym =";
  for (std::size_t i = 0; i < k; ++i) def += " s" + std::to_string(i);
  return std::make_shared<const Schema>(parse_schema(def + "\ncomposite w = phones:string<sym>\n"));
}

}  // namespace

TEST(InfoProperty, CarterIdentityAndScaleInvariance) {
  std::mt19937_64 rng(31);
  const auto schema = string_word_schema(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto lex = random_lexicon(rng, schema, 5);
    const auto classes = fixtures::random_partition(fixtures::alphabet(5), rng);
    const auto spec = parse_contrast(fixtures::partition_line("sym", classes), schema, "w");
    const auto r = cohort_analysis(lex, spec);
    EXPECT_LT(std::abs(r.carter_expected_entropy - (r.h_w - r.h_w_theta)), 1e-9);
    EXPECT_GE(r.huttenlocher_expected_size, 1.0 - 1e-12);
    EXPECT_GE(r.shipman_avg_size, 1.0);

    auto scaled = lex;
    for (auto& [key, e] : scaled.entries) e.weight *= 7.25;
    const auto s = cohort_analysis(scaled, spec);
    EXPECT_NEAR(s.h_w, r.h_w, 1e-12);
    EXPECT_NEAR(s.h_w_theta, r.h_w_theta, 1e-12);
    EXPECT_NEAR(s.carter_expected_entropy, r.carter_expected_entropy, 1e-12);
    EXPECT_NEAR(s.huttenlocher_expected_size, r.huttenlocher_expected_size, 1e-12);
    EXPECT_EQ(s.shipman_avg_size, r.shipman_avg_size);
    if (r.pie) {
      EXPECT_NEAR(*s.pie, *r.pie, 1e-9);
    }
    if (r.h_w > 0) {
      EXPECT_NEAR(functional_load(scaled, spec).fl, functional_load(lex, spec).fl, 1e-12);
    }
  }
}

TEST(InfoProperty, EntropyIgnoresKeyOrder) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    NGramTable a(1), b(1);
    std::vector<double> counts;
    for (int i = 0; i < 12; ++i) counts.push_back(static_cast<double>(rng() % 50));
    for (std::size_t i = 0; i < counts.size(); ++i) a.add({"k" + std::to_string(i + 10)}, counts[i]);
    std::shuffle(counts.begin(), counts.end(), rng);
    for (std::size_t i = 0; i < counts.size(); ++i) b.add({"k" + std::to_string(i + 10)}, counts[i]);
    if (a.total() == 0) continue;
    EXPECT_EQ(entropy(a).raw_bits, entropy(b).raw_bits);
  }
}

TEST(InfoProperty, BoundsMonotonicityAndOracle) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t k = 2 + rng() % 5;
    const auto schema = fixtures::alphabet_schema(k);
    const auto symbols = fixtures::alphabet(k);
    oracle::Corpus sym;
    const std::size_t utts = 1 + rng() % 3;
    for (std::size_t u = 0; u < utts; ++u) {
      auto& utt = sym.emplace_back();
      const std::size_t len = 4 + rng() % 8;
      for (std::size_t i = 0; i < len; ++i) utt.push_back(symbols[rng() % k]);
    }
    const auto corpus = fixtures::atomic_corpus(schema, "sym", sym);
    const std::size_t n = 1 + rng() % 3;
    if (oracle::ngram_entropy(sym, n) == 0.0) continue;

    const auto fine = fixtures::random_partition(symbols, rng);
    std::vector<std::vector<std::string>> coarse = fine;
    // Coarser: fold the first two fine classes together, or add a new pair.
    if (coarse.size() >= 2) {
      coarse[0].insert(coarse[0].end(), coarse[1].begin(), coarse[1].end());
      coarse.erase(coarse.begin() + 1);
    } else {
      coarse = {symbols};
    }
    for (auto& c : coarse) std::sort(c.begin(), c.end());
    const auto fine_spec = parse_contrast(fixtures::partition_line("sym", fine), schema, "sym");
    const auto coarse_spec =
        parse_contrast(fixtures::partition_line("sym", coarse), schema, "sym");
    const double fl_fine = functional_load(corpus, fine_spec, n).fl;
    const double fl_coarse = functional_load(corpus, coarse_spec, n).fl;
    EXPECT_GE(fl_fine, 0.0);
    EXPECT_LE(fl_coarse, 1.0);
    EXPECT_GE(fl_coarse, fl_fine - 1e-12);

    std::map<std::string, std::string> g;
    for (const auto& c : fine) {
      std::string label;
      auto sorted = c;
      std::sort(sorted.begin(), sorted.end());
      for (const auto& m : sorted) label += (label.empty() ? "" : "+") + m;
      for (const auto& m : c) g[m] = label;
    }
    EXPECT_NEAR(fl_fine, oracle::functional_load(sym, oracle::relabel(sym, g), n), 1e-12);
  }
}

#include <gtest/gtest.h>

#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>

#include "fload/contrast.hpp"
#include "support.hpp"

using namespace fload;

namespace {

SchemaPtr consonant_schema() {
  return std::make_shared<const Schema>(parse_schema(
      "atomic phn = p b t d k g s z f v sh zh th dh ch jh m n a i\n"));
}

Value syl(const std::string& text) { return parse_value(text, *fixtures::word_schema(), "syl"); }
Value wrd(const std::string& text) { return parse_value(text, *fixtures::word_schema(), "wrd"); }

ContrastSpec syl_spec(const std::string& text) {
  return parse_contrast(text, fixtures::word_schema(), "syl");
}

constexpr const char* kVowels = "{iy ih ae aa ah uw i a e o u ay}";

}  // namespace

TEST(ParseContrast, ToyMerge) {
  const auto spec = parse_contrast("partition toy : {b c}\n", fixtures::toy_schema(), "toy");
  ASSERT_EQ(spec.rules.size(), 1u);
  const auto& rel = std::get<Relabel>(spec.rules[0]);
  ASSERT_EQ(rel.partition.classes().size(), 1u);
  EXPECT_EQ(rel.partition.classes()[0].label, "b+c");
  EXPECT_TRUE(rel.guard.empty());
}

TEST(ParseContrast, Voicing) {
  const auto spec = parse_contrast(
      "partition phn : {p b} {t d} {k g} {s z} {f v} {sh zh} {th dh} {ch jh}", consonant_schema(),
      "phn");
  const auto& part = std::get<Relabel>(spec.rules[0]).partition;
  EXPECT_EQ(part.classes().size(), 8u);
  EXPECT_EQ(*part.label_of("z"), "s+z");
  EXPECT_EQ(part.label_of("m"), nullptr);
}

TEST(ParseContrast, Errors) {
  const auto toy = fixtures::toy_schema();
  EXPECT_THROW(parse_contrast("partition toy : {a b} {a c}", toy, "toy"), ParseError);
  EXPECT_THROW(parse_contrast("partition toy : {a q}", toy, "toy"), ParseError);
  EXPECT_THROW(parse_contrast("partition toy : {a}", toy, "toy"), ParseError);
  EXPECT_THROW(parse_contrast("partition nope : {a b}", toy, "toy"), ParseError);
  EXPECT_THROW(parse_contrast("partition toy {a b}", toy, "toy"), ParseError);
  EXPECT_THROW(parse_contrast("partition toy : {a b", toy, "toy"), ParseError);
  EXPECT_THROW(parse_contrast("partition toy : {a b} as c", toy, "toy"), ParseError);
  EXPECT_THROW(parse_contrast("merge toy : {a b}", toy, "toy"), ParseError);

  const auto w = fixtures::word_schema();
  EXPECT_THROW(parse_contrast("partition phn : {p b} when loud=yes", w, "syl"), ParseError);
  EXPECT_THROW(parse_contrast("partition phn : {p b} when sideways", w, "syl"), ParseError);
  // Only one string level above phonemes in a syllable corpus.
  EXPECT_THROW(parse_contrast("partition phn : {p b} when outermost-initial", w, "syl"),
               ParseError);
  EXPECT_NO_THROW(parse_contrast("partition phn : {p b} when outermost-initial", w, "wrd"));
  EXPECT_THROW(parse_contrast("insert t in syl.stress after n before s", w, "syl"), ParseError);
  EXPECT_THROW(parse_contrast("insert t in syl.nope after n before s", w, "syl"), ParseError);
  EXPECT_THROW(parse_contrast("insert zz in syl.phones after n before s", w, "syl"), ParseError);
  EXPECT_THROW(parse_contrast("delete j in wrd.syls", w, "wrd"), ParseError);
  // syl occurs in wrd, not the other way round.
  EXPECT_THROW(parse_contrast("partition str : {primary secondary}", w, "phn"), ParseError);
}

TEST(ParseContrast, ErrorPosition) {
  try {
    parse_contrast("partition toy : {a b}\n\npartition toy : {b q}\n", fixtures::toy_schema(),
                   "toy");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 17u);
  }
}

TEST(ParseContrast, LaterRulesSeeEarlierLabels) {
  const auto spec = parse_contrast("partition toy : {b c}\npartition toy : {a b+c}\n",
                                   fixtures::toy_schema(), "toy");
  EXPECT_EQ(apply_contrast(spec, Value::atomic("c")).token(), "a+b+c");
  EXPECT_TRUE(spec.image_schema().atomic("toy")->contains("a+b+c"));
}

TEST(ParseContrast, SerializeRoundTrip) {
  const std::string text =
      std::string("partition phn : ") + kVowels + " as V when stress=unstressed\n" +
      "partition phn : {p b} {s z} when string-initial & left-in {n m} & right-in {a i}\n"
      "insert t in syl.phones after n before s\n"
      "delete j in syl.phones when right-in {iy uw}\n"
      "partition str : {primary secondary}\n";
  const auto spec = syl_spec(text);
  const auto again = syl_spec(serialize_contrast(spec));
  EXPECT_EQ(serialize_contrast(again), serialize_contrast(spec));
  EXPECT_EQ(again.rules.size(), 5u);
}

TEST(ApplyContrast, ToyMergedString) {
  const auto spec = parse_contrast("partition toy : {b c}", fixtures::toy_schema(), "toy");
  const auto merged = apply_to_corpus(spec, fixtures::toy_corpus());
  std::string flat;
  for (const auto& v : merged.utterances[0]) flat += v.token() == "b+c" ? "d" : v.token();
  EXPECT_EQ(flat, "adaddaaddaaddadadad");
  for (const auto& v : merged.utterances[0])
    EXPECT_TRUE(validate_value(*merged.schema, "toy", v).empty());
}

TEST(ApplyContrast, Epenthesis) {
  const auto spec = syl_spec("insert t in syl.phones after n before s");
  EXPECT_EQ(apply_contrast(spec, syl("(k ae n s ; primary)")).canonical(),
            "(k ae n t s ; primary)");
  EXPECT_EQ(apply_contrast(spec, syl("(k ae n s ; primary)")),
            apply_contrast(spec, syl("(k ae n t s ; primary)")));
  EXPECT_EQ(apply_contrast(spec, syl("(n s n s ; x)")).canonical(), "(n t s n t s ; x)");
  // Insertion sites come from the original string only.
  const auto feed = syl_spec("insert n in syl.phones after n before n");
  EXPECT_EQ(apply_contrast(feed, syl("(n n ; x)")).canonical(), "(n n n ; x)");
}

TEST(ApplyContrast, VowelReduction) {
  const auto spec = syl_spec(std::string("partition phn : ") + kVowels +
                             " as V when stress=unstressed");
  EXPECT_EQ(apply_contrast(spec, syl("(m i ng ; unstressed)")).canonical(),
            "(m V ng ; unstressed)");
  EXPECT_EQ(apply_contrast(spec, syl("(m i ng ; primary)")).canonical(), "(m i ng ; primary)");
  // Inside words the nearest enclosing syllable decides.
  const auto wspec = parse_contrast(std::string("partition phn : ") + kVowels +
                                        " as V when stress=unstressed",
                                    fixtures::word_schema(), "wrd");
  EXPECT_EQ(apply_contrast(wspec, wrd("((b ae ; primary) (t ih ; unstressed))")).canonical(),
            "((b ae ; primary) (t V ; unstressed))");
}

TEST(ApplyContrast, WordInitialMerger) {
  const auto spec =
      parse_contrast("partition phn : {l n} as l when outermost-initial", fixtures::word_schema(),
                     "wrd");
  EXPECT_EQ(apply_contrast(spec, wrd("((n ay ; primary) (n ay ; x))")).canonical(),
            "((l ay ; primary) (n ay ; x))");
  EXPECT_EQ(apply_contrast(spec, wrd("((ay n ; primary))")).canonical(), "((ay n ; primary))");
  EXPECT_EQ(apply_contrast(spec, wrd("((l ay n ; primary))")).canonical(),
            "((l ay n ; primary))");
  // string-initial alone also fires at the start of later syllables.
  const auto loose = parse_contrast("partition phn : {l n} as l when string-initial",
                                    fixtures::word_schema(), "wrd");
  EXPECT_EQ(apply_contrast(loose, wrd("((n ay ; primary) (n ay ; x))")).canonical(),
            "((l ay ; primary) (l ay ; x))");
}

TEST(ApplyContrast, JDeletionBeforeHighVowel) {
  const auto spec = syl_spec("delete j in syl.phones when right-in {iy uw}");
  EXPECT_EQ(apply_contrast(spec, syl("(n j uw ; primary)")).canonical(), "(n uw ; primary)");
  EXPECT_EQ(apply_contrast(spec, syl("(j ae ; primary)")).canonical(), "(j ae ; primary)");
  EXPECT_EQ(apply_contrast(spec, syl("(j iy j ; x)")).canonical(), "(iy j ; x)");
  EXPECT_EQ(apply_contrast(spec, syl("(j j uw ; x)")).canonical(), "(j uw ; x)");
}

TEST(ApplyContrast, DeleteEmptyingStringIsAnError) {
  const auto spec = parse_contrast("delete h in syl.phones", fixtures::word_schema(), "wrd");
  EXPECT_EQ(apply_contrast(spec, wrd("((h ae t ; primary))")).canonical(), "((ae t ; primary))");
  try {
    apply_contrast(spec, wrd("((ae ; primary) (h h ; x))"));
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("/0/1/0"), std::string::npos) << e.what();
  }
}

TEST(ApplyContrast, NeighbourGuards) {
  const auto spec = syl_spec("partition phn : {s z} when left-in {n} & string-final");
  EXPECT_EQ(apply_contrast(spec, syl("(s n z ; x)")).canonical(), "(s n s+z ; x)");
  EXPECT_EQ(apply_contrast(spec, syl("(n z a ; x)")).canonical(), "(n z a ; x)");
}

TEST(ApplyContrast, StressPartitionIsInherited) {
  const auto spec =
      parse_contrast("partition str : {primary secondary unstressed x}", fixtures::word_schema(),
                     "wrd");
  EXPECT_EQ(apply_contrast(spec, wrd("((b ae ; primary) (t ih ; unstressed))")),
            apply_contrast(spec, wrd("((b ae ; unstressed) (t ih ; primary))")));
}

TEST(ApplyToCorpus, LexiconWeightsCollide) {
  const auto schema = fixtures::word_schema();
  const auto lex = parse_weighted_lexicon(
      "4\t((b ae t ; primary))\n2\t((p ae t ; primary))\n2\t((k ae t ; primary))\n", schema,
      "wrd");
  const auto spec = parse_contrast("partition phn : {b p}", schema, "wrd");
  const auto merged = apply_to_corpus(spec, lex);
  ASSERT_EQ(merged.size(), 2u);
  EXPECT_DOUBLE_EQ(merged.entries.at("((b+p ae t ; primary))").weight, 6.0);
  EXPECT_DOUBLE_EQ(merged.entries.at("((k ae t ; primary))").weight, 2.0);
}

TEST(ApplyToCorpus, IdentitySpec) {
  const auto spec = parse_contrast("# nothing\n", fixtures::toy_schema(), "toy");
  const auto c = fixtures::toy_corpus();
  EXPECT_EQ(apply_to_corpus(spec, c).utterances, c.utterances);
  const auto other = parse_token_stream("(l ay ; x)", fixtures::word_schema(), "syl");
  EXPECT_THROW(apply_to_corpus(spec, other), InputError);
}

TEST(BinaryOppositions, Counts) {
  const auto wxyz = std::make_shared<const Schema>(parse_schema("atomic phn = w x y z q"));
  const auto six = binary_oppositions(wxyz, "phn", {"z", "w", "y", "x"});
  ASSERT_EQ(six.size(), 6u);
  std::vector<std::string> ids;
  for (const auto& s : six) ids.push_back(s.id);
  EXPECT_EQ(ids, (std::vector<std::string>{"w/x", "w/y", "w/z", "x/y", "x/z", "y/z"}));

  const auto ab = binary_oppositions(fixtures::toy_schema(), "toy", {"a", "b"});
  ASSERT_EQ(ab.size(), 1u);
  EXPECT_EQ(std::get<Relabel>(ab[0].rules[0]).partition.classes()[0].members,
            (std::vector<std::string>{"a", "b"}));

  const auto letters = std::make_shared<const Schema>(
      parse_schema("atomic l = a b c d e f g h i j k l m n o p q r s t u v w x y z"));
  const auto all = letters->atomic("l")->inventory();
  EXPECT_EQ(binary_oppositions(letters, "l", all).size(), 325u);

  EXPECT_THROW(binary_oppositions(wxyz, "phn", {"w", "nope"}), InputError);
  EXPECT_THROW(binary_oppositions(wxyz, "phn", {"w"}), InputError);
}

namespace {

std::vector<std::string> small_phones{"p", "b", "t", "a", "i"};
std::vector<std::string> small_stress{"primary", "unstressed"};

SchemaPtr small_syllable_schema() {
  return std::make_shared<const Schema>(parse_schema(
      "atomic phn = p b t a i\natomic str = primary unstressed\n"
      "composite syl = phones:string<phn> stress:str\n"));
}

/// Every syllable with 1..3 phones.
std::vector<Value> all_syllables() {
  std::vector<Value> out;
  std::function<void(std::vector<Value>&)> rec = [&](std::vector<Value>& ph) {
    if (!ph.empty())
      for (const auto& s : small_stress)
        out.push_back(Value::composite({Value::string(ph), Value::atomic(s)}));
    if (ph.size() == 3) return;
    for (const auto& p : small_phones) {
      ph.push_back(Value::atomic(p));
      rec(ph);
      ph.pop_back();
    }
  };
  std::vector<Value> ph;
  rec(ph);
  return out;
}

bool same_shape(const Value& a, const Value& b) {
  if (a.kind() != b.kind() || a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!same_shape(a.child(i), b.child(i))) return false;
  return true;
}

}  // namespace

TEST(ContrastProperty, IdempotentShapePreservingAndWellTyped) {
  const auto schema = small_syllable_schema();
  const auto values = all_syllables();
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const auto classes = fixtures::random_partition(small_phones, rng);
    if (classes.empty()) continue;
    const auto spec = parse_contrast(fixtures::partition_line("phn", classes), schema, "syl");
    const auto image = spec.image_schema();
    for (const auto& v : values) {
      const auto once = apply_contrast(spec, v);
      EXPECT_EQ(apply_contrast(spec, once), once);
      EXPECT_EQ(apply_contrast(spec, v), once);
      EXPECT_TRUE(same_shape(v, once));
      EXPECT_TRUE(validate_value(image, "syl", once).empty());
    }
  }
}

TEST(ContrastProperty, RefinementFactorsThroughCoarser) {
  const auto schema = small_syllable_schema();
  const auto values = all_syllables();
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 40; ++trial) {
    auto fine = fixtures::random_partition(small_phones, rng);
    // Coarsen by merging random pairs of classes (singletons included).
    std::map<std::string, int> block;
    int next = 0;
    for (const auto& p : small_phones) block[p] = next++;
    for (const auto& c : fine)
      for (const auto& m : c) block[m] = block[c.front()];
    for (int k = 0; k < 2; ++k) {
      const auto& a = small_phones[rng() % small_phones.size()];
      const auto& b = small_phones[rng() % small_phones.size()];
      const int from = block[b], to = block[a];
      for (auto& [p, blk] : block)
        if (blk == from) blk = to;
    }
    std::map<int, std::vector<std::string>> groups;
    for (const auto& [p, blk] : block) groups[blk].push_back(p);
    std::vector<std::vector<std::string>> coarse;
    for (auto& [blk, g] : groups)
      if (g.size() >= 2) coarse.push_back(g);
    if (coarse.empty()) continue;
    const auto g1 = fine.empty()
                        ? parse_contrast("", schema, "syl")
                        : parse_contrast(fixtures::partition_line("phn", fine), schema, "syl");
    const auto g2 = parse_contrast(fixtures::partition_line("phn", coarse), schema, "syl");
    // g2 = h o g1 for some h  <=>  g1(v) == g1(w) implies g2(v) == g2(w).
    std::map<std::string, std::string> h;
    for (const auto& v : values) {
      const auto [it, inserted] =
          h.emplace(apply_contrast(g1, v).canonical(), apply_contrast(g2, v).canonical());
      if (!inserted) {
        EXPECT_EQ(it->second, apply_contrast(g2, v).canonical());
      }
    }
  }
}

TEST(ContrastProperty, GuardLocality) {
  const auto schema = small_syllable_schema();
  const auto spec =
      parse_contrast("partition phn : {p b t} {a i} when stress=unstressed", schema, "syl");
  for (const auto& v : all_syllables()) {
    const auto out = apply_contrast(spec, v);
    if (v.child(1).token() != "unstressed") {
      EXPECT_EQ(out, v);
    }
    EXPECT_EQ(apply_contrast(spec, v), out);  // deterministic
  }
}

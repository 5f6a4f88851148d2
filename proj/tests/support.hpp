#pragma once

// Fixtures and random generators shared by the test suites.

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "fload/fload.hpp"

namespace fixtures {

inline constexpr const char* kToyCorpus = "abaccaaccaabbacabab";

inline fload::SchemaPtr toy_schema() {
  return std::make_shared<const fload::Schema>(fload::parse_schema("atomic toy = a b c\n"));
}

/// The toy string as a one-utterance corpus, one symbol per object.
inline fload::TokenStreamCorpus toy_corpus() {
  std::string line;
  for (const char* p = kToyCorpus; *p; ++p) {
    if (!line.empty()) line += ' ';
    line += *p;
  }
  return fload::parse_token_stream(line, toy_schema(), "toy");
}

/// Phonemes, stress, syllables and words.
inline constexpr const char* kWordSchema = R"(# four-type setup
atomic phn = p b t d k g m n ng s z l j r h iy ih ae aa ah uw i a e o u ay
atomic str = primary secondary unstressed x
composite syl = phones:string<phn> stress:str
composite wrd = syls:string<syl>
)";

inline fload::SchemaPtr word_schema() {
  return std::make_shared<const fload::Schema>(fload::parse_schema(kWordSchema));
}

inline fload::SchemaPtr alphabet_schema(std::size_t k) {
  std::string def = "atomic sym =";
  for (std::size_t i = 0; i < k; ++i) def += " s" + std::to_string(i);
  return std::make_shared<const fload::Schema>(fload::parse_schema(def));
}

inline std::vector<std::string> alphabet(std::size_t k) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back("s" + std::to_string(i));
  return out;
}

/// Atomic corpus from symbol vectors.
inline fload::TokenStreamCorpus atomic_corpus(fload::SchemaPtr schema, const std::string& type,
                                              const std::vector<std::vector<std::string>>& utts) {
  fload::TokenStreamCorpus c{schema, type, {}};
  for (const auto& u : utts) {
    auto& o = c.utterances.emplace_back();
    for (const auto& s : u) o.push_back(fload::Value::atomic(s));
  }
  return c;
}

/// Random partition of `symbols` into classes; singletons dropped.
inline std::vector<std::vector<std::string>> random_partition(
    const std::vector<std::string>& symbols, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, symbols.size() - 1);
  std::vector<std::vector<std::string>> blocks(symbols.size());
  for (const auto& s : symbols) blocks[pick(rng)].push_back(s);
  std::vector<std::vector<std::string>> out;
  for (auto& b : blocks)
    if (b.size() >= 2) out.push_back(std::move(b));
  return out;
}

inline std::string partition_line(const std::string& type,
                                  const std::vector<std::vector<std::string>>& classes) {
  if (classes.empty()) return "";  // identity spec
  std::string line = "partition " + type + " :";
  for (const auto& c : classes) {
    line += " {";
    for (std::size_t i = 0; i < c.size(); ++i) line += (i ? " " : "") + c[i];
    line += "}";
  }
  return line + "\n";
}

}  // namespace fixtures

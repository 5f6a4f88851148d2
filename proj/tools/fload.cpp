// fload: functional-load reports from the command line.
//
// Exit status: 0 on success, 1 for unreadable or malformed input, 2 when the
// requested quantity is undefined for the input (e.g. a degenerate corpus).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fload/fload.hpp"

namespace {

using nlohmann::json;
using namespace fload;

struct Options {
  std::string schema;
  std::string corpus;
  std::string corpus_format = "stream";
  std::string type;
  std::vector<std::string> contrasts;
  std::size_t n = 1;
  std::string output = "tsv";
  std::string pairs;
  std::string atomic;
  std::string similar;
  std::vector<std::string> phonemes;
  std::string join_lexicon;
  std::string miss = "error";
  unsigned jobs = 1;
  double threshold = 0.9;
  std::vector<std::string> reports;
};

// Errors raised while reading a particular file carry its path.
template <typename F>
auto in_file(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const DomainError& e) {
    throw DomainError(path + ": " + e.what());
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

using Cell = std::variant<std::string, long long, double>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string render_tsv(const Table& t) {
  std::string out;
  auto line = [&](const auto& cells, auto&& show) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += '\t';
      out += show(cells[i]);
    }
    out += '\n';
  };
  line(t.columns, [](const std::string& s) { return s; });
  for (const auto& r : t.rows)
    line(r, [](const Cell& c) {
      if (const auto* s = std::get_if<std::string>(&c)) return *s;
      if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
      return fmt(std::get<double>(c));
    });
  return out;
}

json cell_json(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* i = std::get_if<long long>(&c)) return *i;
  // Same 12 significant digits as the TSV form.
  return std::stod(fmt(std::get<double>(c)));
}

std::string render_json(const std::string& command, const json& inputs, const Table& t) {
  json results = json::array();
  for (const auto& r : t.rows) {
    json row = json::object();
    for (std::size_t i = 0; i < t.columns.size(); ++i) row[t.columns[i]] = cell_json(r[i]);
    results.push_back(std::move(row));
  }
  json doc{{"meta", {{"command", command}, {"inputs", inputs}, {"version", kVersion}}},
           {"results", std::move(results)}};
  return doc.dump(2) + "\n";
}

json inputs_of(const Options& o) {
  json in = json::object();
  auto put = [&](const char* k, const std::string& v) {
    if (!v.empty()) in[k] = v;
  };
  put("schema", o.schema);
  put("corpus", o.corpus);
  if (!o.corpus.empty()) in["corpus_format"] = o.corpus_format;
  put("type", o.type);
  if (!o.contrasts.empty()) in["contrast"] = o.contrasts;
  if (!o.corpus.empty()) in["n"] = o.n;
  put("pairs", o.pairs);
  put("atomic", o.atomic);
  put("similar", o.similar);
  if (!o.phonemes.empty()) in["phoneme"] = o.phonemes;
  if (!o.join_lexicon.empty()) {
    in["join_lexicon"] = o.join_lexicon;
    in["miss"] = o.miss;
  }
  if (!o.reports.empty()) in["reports"] = o.reports;
  return in;
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw InputError(std::string(flag) + " is required");
}

SchemaPtr load_schema(const Options& o) {
  require(o.schema, "--schema");
  const auto doc = read_file(o.schema);
  return in_file(o.schema, [&] { return std::make_shared<const Schema>(parse_schema(doc)); });
}

using Corpus = std::variant<TokenStreamCorpus, WeightedLexicon>;

Corpus load_corpus(const Options& o, const SchemaPtr& schema) {
  require(o.corpus, "--corpus");
  require(o.type, "--type");
  const auto doc = read_file(o.corpus);
  if (o.corpus_format == "lexicon") {
    if (!o.join_lexicon.empty()) throw InputError("--join-lexicon needs a token-stream corpus");
    if (o.n != 1) throw InputError("lexicon corpora only support -n 1");
    return in_file(o.corpus, [&] { return parse_weighted_lexicon(doc, schema, o.type); });
  }
  if (o.join_lexicon.empty())
    return in_file(o.corpus, [&] { return parse_token_stream(doc, schema, o.type); });

  const auto keys = in_file(o.corpus, [&] { return parse_key_stream(doc); });
  const auto pron_doc = read_file(o.join_lexicon);
  const auto pron =
      in_file(o.join_lexicon, [&] { return parse_pronunciations(pron_doc, *schema, o.type); });
  const auto policy = o.miss == "skip" ? MissPolicy::skip : MissPolicy::error;
  auto joined = in_file(o.corpus, [&] { return join_lexicon(keys, pron, schema, o.type, policy); });
  if (joined.misses > 0)
    std::cerr << "fload: skipped " << joined.misses << " tokens of " << joined.missing_keys.size()
              << " keys with no pronunciation\n";
  return std::move(joined.corpus);
}

ContrastSpec load_contrast(const std::string& path, const SchemaPtr& schema,
                           const std::string& type) {
  const auto doc = read_file(path);
  const auto id = std::filesystem::path(path).stem().string();
  return in_file(path, [&] { return parse_contrast(doc, schema, type, id); });
}

const TokenStreamCorpus& stream_only(const Corpus& c, const char* command) {
  if (const auto* s = std::get_if<TokenStreamCorpus>(&c)) return *s;
  throw InputError(std::string(command) + " needs --corpus-format stream");
}

// --atomic, else the object type when atomic, else the one atomic type
// holding every token in `tokens`.
std::string resolve_atomic(const Options& o, const Schema& schema,
                           const std::vector<std::string>& tokens) {
  if (!o.atomic.empty()) {
    if (!schema.atomic(o.atomic)) throw InputError("'" + o.atomic + "' is not an atomic type");
    return o.atomic;
  }
  if (schema.atomic(o.type)) return o.type;
  std::vector<std::string> hits;
  for (const auto& e : schema.types()) {
    const auto* a = std::get_if<AtomicType>(&e.second);
    if (!a) continue;
    bool all = !tokens.empty();
    for (const auto& t : tokens) all = all && a->contains(t);
    if (all) hits.push_back(e.first);
  }
  if (hits.size() != 1)
    throw InputError(hits.empty() ? "no atomic type holds all of the given tokens; use --atomic"
                                  : "tokens are ambiguous between atomic types; use --atomic");
  return hits.front();
}

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  for (auto w : text::split_ws(s)) out.emplace_back(w);
  return out;
}

Table cmd_fl(const Options& o) {
  const auto schema = load_schema(o);
  const auto corpus = load_corpus(o, schema);
  if (o.contrasts.empty()) throw InputError("--contrast is required");
  Table t{{"contrast", "n", "h_before", "h_after", "fl", "total_before", "types_before",
           "types_after"},
          {}};
  for (const auto& path : o.contrasts) {
    const auto spec = load_contrast(path, schema, o.type);
    const auto r = std::visit(
        [&](const auto& c) {
          if constexpr (std::is_same_v<std::decay_t<decltype(c)>, TokenStreamCorpus>)
            return functional_load(c, spec, o.n, o.jobs);
          else
            return functional_load(c, spec, 1);
        },
        corpus);
    t.rows.push_back({spec.id, static_cast<long long>(r.n), r.h_before, r.h_after, r.fl,
                      r.before.total, static_cast<long long>(r.before.distinct),
                      static_cast<long long>(r.after.distinct)});
  }
  return t;
}

Table cmd_fl_matrix(const Options& o) {
  const auto schema = load_schema(o);
  const auto loaded = load_corpus(o, schema);
  const auto& corpus = stream_only(loaded, "fl-matrix");
  auto pairs = words(o.pairs);
  const auto atomic = resolve_atomic(o, *schema, pairs);
  if (pairs.empty()) pairs = schema->atomic(atomic)->inventory();
  const auto m = fl_matrix(corpus, atomic, pairs, o.n, o.jobs);
  Table t{{"x", "y", "fl", "rank"}, {}};
  for (const auto& e : m.entries) t.rows.push_back({e.x, e.y, e.fl, rank_entry(m, e.x, e.y)});
  return t;
}

Table cmd_cohorts(const Options& o) {
  const auto schema = load_schema(o);
  const auto loaded = load_corpus(o, schema);
  const auto* lex = std::get_if<WeightedLexicon>(&loaded);
  if (!lex) throw InputError("cohorts needs --corpus-format lexicon");
  if (o.contrasts.empty()) throw InputError("--contrast is required");
  Table t{{"contrast", "words", "cohorts", "shipman", "huttenlocher", "carter", "h_w",
           "h_w_theta", "pie"},
          {}};
  for (const auto& path : o.contrasts) {
    const auto spec = load_contrast(path, schema, o.type);
    const auto r = cohort_analysis(*lex, spec);
    if (!r.pie) throw DomainError("degenerate corpus: H(W) = 0, PIE is undefined");
    t.rows.push_back({spec.id, static_cast<long long>(r.word_count),
                      static_cast<long long>(r.cohort_count), r.shipman_avg_size,
                      r.huttenlocher_expected_size, r.carter_expected_entropy, r.h_w,
                      r.h_w_theta, *r.pie});
  }
  return t;
}

using PairKey = std::pair<std::string, std::string>;

// Reads the x, y and fl columns of an fl-matrix report in either format.
std::map<PairKey, double> read_matrix_report(const std::string& path) {
  const auto doc = read_file(path);
  return in_file(path, [&] {
    std::map<PairKey, double> out;
    auto add = [&](std::string x, std::string y, double fl, std::size_t lineno) {
      if (y < x) std::swap(x, y);
      if (!out.emplace(PairKey{x, y}, fl).second)
        throw ParseError("duplicate pair " + x + " " + y, lineno);
    };
    const auto body = text::trim(doc);
    if (!body.empty() && body.front() == '{') {
      json j;
      try {
        j = json::parse(doc);
        for (const auto& row : j.at("results"))
          add(row.at("x").get<std::string>(), row.at("y").get<std::string>(),
              row.at("fl").get<double>(), 0);
      } catch (const json::exception& e) {
        throw InputError(std::string("not an fl-matrix report: ") + e.what());
      }
      return out;
    }
    const auto lines = text::split_lines(doc);
    if (lines.empty()) throw InputError("empty report");
    const auto header = text::split_ws(lines[0]);
    auto column = [&](std::string_view name) {
      for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
      throw ParseError("missing column '" + std::string(name) + "'", 1);
    };
    const auto cx = column("x"), cy = column("y"), cf = column("fl");
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
      const auto cells = text::split_ws(lines[ln]);
      if (cells.empty()) continue;
      if (cells.size() != header.size()) throw ParseError("wrong number of columns", ln + 1);
      double fl = 0.0;
      const auto f = cells[cf];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), fl);
      if (ec != std::errc() || ptr != f.data() + f.size())
        throw ParseError("malformed number '" + std::string(f) + "'", ln + 1);
      add(std::string(cells[cx]), std::string(cells[cy]), fl, ln + 1);
    }
    return out;
  });
}

Table cmd_alpha(const Options& o) {
  const auto a = read_matrix_report(o.reports.at(0));
  const auto b = read_matrix_report(o.reports.at(1));
  std::vector<double> xs, ys;
  for (const auto& [key, fl] : a) {
    const auto it = b.find(key);
    if (it == b.end())
      throw InputError("pair " + key.first + " " + key.second + " is missing from " +
                       o.reports[1]);
    xs.push_back(fl);
    ys.push_back(it->second);
  }
  for (const auto& [key, fl] : b)
    if (!a.count(key))
      throw InputError("pair " + key.first + " " + key.second + " is missing from " +
                       o.reports[0]);
  const auto note = annotate_consistency(consistency_alpha(xs, ys), o.threshold);
  return {{"pairs", "alpha", "threshold", "consistent"},
          {{static_cast<long long>(xs.size()), note.alpha, note.threshold,
            std::string(note.consistent ? "yes" : "no")}}};
}

Table cmd_phoneme_fl(const Options& o) {
  const auto schema = load_schema(o);
  const auto loaded = load_corpus(o, schema);
  const auto& corpus = stream_only(loaded, "phoneme-fl");
  require(o.similar, "--similar");
  const auto model_doc = read_file(o.similar);
  auto xs = o.phonemes;
  if (xs.empty()) {
    const auto model = in_file(o.similar, [&] { return parse_similarity_model(model_doc); });
    for (const auto& kv : model.similar) xs.push_back(kv.first);
  }
  std::vector<std::string> tokens = xs;
  const auto atomic = resolve_atomic(o, *schema, tokens);
  const auto model = in_file(
      o.similar, [&] { return parse_similarity_model(model_doc, schema->atomic(atomic)); });
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  Table t{{"x", "fl", "y", "weight", "fl_xy"}, {}};
  for (const auto& x : xs) {
    if (!schema->atomic(atomic)->contains(x))
      throw InputError("unknown token '" + x + "' for type '" + atomic + "'");
    const auto r = single_phoneme_fl(corpus, atomic, x, model, o.n, nullptr, o.jobs);
    if (r.terms.empty()) t.rows.push_back({x, r.fl, std::string("-"), 0.0, 0.0});
    for (const auto& term : r.terms) t.rows.push_back({x, r.fl, term.y, term.weight, term.fl});
  }
  return t;
}

Table cmd_validate(const Options& o) {
  Table t{{"file", "kind", "status", "detail"}, {}};
  const auto schema = load_schema(o);
  t.rows.push_back({o.schema, std::string("schema"), std::string("ok"),
                    std::to_string(schema->size()) + " types"});
  if (!o.corpus.empty()) {
    const auto c = load_corpus(o, schema);
    std::visit(
        [&](const auto& v) {
          std::string detail;
          if constexpr (std::is_same_v<std::decay_t<decltype(v)>, TokenStreamCorpus>)
            detail = std::to_string(v.utterances.size()) + " utterances, " +
                     std::to_string(v.object_count()) + " objects";
          else
            detail = std::to_string(v.size()) + " entries";
          t.rows.push_back({o.corpus, std::string("corpus"), std::string("ok"), detail});
        },
        c);
  }
  for (const auto& path : o.contrasts) {
    require(o.type, "--type");
    const auto spec = load_contrast(path, schema, o.type);
    t.rows.push_back({path, std::string("contrast"), std::string("ok"),
                      std::to_string(spec.rules.size()) + " rules"});
  }
  if (!o.similar.empty()) {
    const auto doc = read_file(o.similar);
    const auto m = in_file(o.similar, [&] { return parse_similarity_model(doc); });
    t.rows.push_back({o.similar, std::string("similarity"), std::string("ok"),
                      std::to_string(m.similar.size()) + " sets"});
  }
  return t;
}

void add_input_options(CLI::App* sub, Options& o, bool contrast) {
  sub->add_option("--schema", o.schema, "Schema file")->required();
  sub->add_option("--corpus", o.corpus, "Corpus file");
  sub->add_option("--corpus-format", o.corpus_format, "stream or lexicon")
      ->check(CLI::IsMember({"stream", "lexicon"}));
  sub->add_option("--type", o.type, "Object type of the corpus");
  if (contrast) sub->add_option("--contrast", o.contrasts, "Contrast file (repeatable)");
  sub->add_option("--join-lexicon", o.join_lexicon,
                  "Pronunciation file; the corpus is then read as word keys");
  sub->add_option("--miss", o.miss, "Keys without a pronunciation: skip or error")
      ->check(CLI::IsMember({"skip", "error"}));
}

void add_run_options(CLI::App* sub, Options& o) {
  sub->add_option("-n", o.n, "N-gram order")->check(CLI::PositiveNumber);
  sub->add_option("--jobs", o.jobs, "Worker threads; output does not depend on it")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Functional load of phonological contrasts"};
  app.set_version_flag("--version", std::string(kVersion));
  app.set_config("--config", "", "TOML/INI file mirroring the command-line flags");
  app.require_subcommand(1);
  Options o;

  auto output = [&](CLI::App* sub) {
    sub->add_option("--output", o.output, "tsv or json")->check(CLI::IsMember({"tsv", "json"}));
    return sub;
  };

  auto* fl = output(app.add_subcommand("fl", "FL of one or more contrasts"));
  add_input_options(fl, o, true);
  add_run_options(fl, o);

  auto* matrix = output(app.add_subcommand("fl-matrix", "FL of every pair in a token set"));
  add_input_options(matrix, o, false);
  add_run_options(matrix, o);
  matrix->add_option("--pairs", o.pairs, "Tokens to pair up, e.g. \"p b t d\"");
  matrix->add_option("--atomic", o.atomic, "Atomic type the tokens belong to");

  auto* cohorts = output(app.add_subcommand("cohorts", "Cohort statistics of a lexicon"));
  add_input_options(cohorts, o, true);

  auto* alpha = output(app.add_subcommand("alpha", "Correlation between two fl-matrix reports"));
  alpha->add_option("reports", o.reports, "Two fl-matrix reports (tsv or json)")
      ->required()
      ->expected(2);
  alpha->add_option("--threshold", o.threshold, "Rule-of-thumb consistency threshold");

  auto* phoneme = output(app.add_subcommand("phoneme-fl", "Expected FL of single phonemes"));
  add_input_options(phoneme, o, false);
  add_run_options(phoneme, o);
  phoneme->add_option("--similar", o.similar, "Similarity model file");
  phoneme->add_option("--phoneme", o.phonemes, "Phoneme to report (repeatable; default all)");
  phoneme->add_option("--atomic", o.atomic, "Atomic type of the phonemes");

  auto* validate = output(app.add_subcommand("validate", "Check input files"));
  add_input_options(validate, o, true);
  validate->add_option("--similar", o.similar, "Similarity model file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  auto* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  try {
    Table t;
    if (sub == fl) t = cmd_fl(o);
    else if (sub == matrix) t = cmd_fl_matrix(o);
    else if (sub == cohorts) t = cmd_cohorts(o);
    else if (sub == alpha) t = cmd_alpha(o);
    else if (sub == phoneme) t = cmd_phoneme_fl(o);
    else t = cmd_validate(o);
    std::cout << (o.output == "json" ? render_json(command, inputs_of(o), t) : render_tsv(t));
    return 0;
  } catch (const DomainError& e) {
    std::cerr << "fload: " << e.what() << '\n';
    return 2;
  } catch (const InputError& e) {
    std::cerr << "fload: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "fload: " << e.what() << '\n';
    return 1;
  }
}

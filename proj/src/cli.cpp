#include "philoscope/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "philoscope/corpus_index.hpp"
#include "philoscope/csv.hpp"
#include "philoscope/dataset.hpp"
#include "philoscope/error.hpp"
#include "philoscope/lexical_metrics.hpp"
#include "philoscope/mqm_scorer.hpp"
#include "philoscope/rarity_profiler.hpp"
#include "philoscope/report.hpp"

#ifndef PHILOSCOPE_DEFAULT_FIXTURES
#define PHILOSCOPE_DEFAULT_FIXTURES "data/fixtures"
#endif

namespace philoscope::cli {
namespace fs = std::filesystem;
namespace {

struct Options {
  std::string format = "markdown";
  std::optional<std::uint64_t> seed;
  bool strict = false;
  unsigned threads = 0;

  // index-corpus
  std::vector<std::string> corpus;
  std::string index_out;
  std::string label;

  // profile
  std::string index;
  std::string passages;
  std::uint64_t rare_threshold = 50;
  std::string risk_bands = "0.20,0.30";
  bool unique_lemmas = false;

  // score
  std::vector<std::string> annotations;

  // metrics
  std::string pairs;
  std::string smoothing = "none";

  // correlate
  std::vector<std::string> mqm;
  std::vector<std::string> metric_files;
  std::vector<std::string> profiles;
  bool by_text = false;
  std::optional<std::size_t> bootstrap;

  // report / verify
  std::vector<std::string> data;
  std::vector<std::string> tables;
  std::vector<std::string> excludes;
  std::string explain;
  std::string baseline = "Mix";

  std::string out;
};

unsigned thread_count(unsigned requested) {
  if (requested) return requested;
  return std::max(1U, std::thread::hardware_concurrency());
}

// Writes to --out when given, otherwise to stdout.
void emit(const Options& o, std::ostream& out, const std::string& text) {
  if (o.out.empty()) {
    out << text;
    return;
  }
  std::ofstream file(o.out, std::ios::binary);
  if (!file) throw Error("cannot write " + o.out);
  file << text;
}

std::vector<fs::path> as_paths(const std::vector<std::string>& items) {
  return {items.begin(), items.end()};
}

std::vector<Stratum> strata(const Options& o) {
  std::vector<Stratum> out;
  for (const auto& e : o.excludes) out.push_back(parse_stratum(e));
  return out;
}

report::Spec base_spec(const Options& o) {
  report::Spec spec;
  spec.format = report::parse_format(o.format);
  spec.strata = strata(o);
  spec.baseline_text = o.baseline;
  spec.smoothing = parse_smoothing(o.smoothing);
  spec.profile.rare_threshold = o.rare_threshold;
  spec.profile.bands = parse_risk_bands(o.risk_bands);
  spec.seed = o.seed;
  if (o.bootstrap) spec.resamples = *o.bootstrap;
  return spec;
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

int index_corpus(const Options& o, std::ostream& out, std::ostream& err) {
  std::vector<LemmaStream> streams;
  for (const auto& p : o.corpus) streams.push_back(read_lemma_stream(p));
  const LemmaStream all = concat(std::move(streams));
  const std::string label = o.label.empty() ? o.corpus.front() : o.label;
  const FrequencyIndex index = FrequencyIndex::build(all, label, thread_count(o.threads));
  std::ostringstream text;
  index.write(text);
  emit(o, out, text.str());
  err << "indexed " << all.documents.size() << " documents, " << index.total_tokens() << " tokens, "
      << index.size() << " lemmas\n";
  return kOk;
}

int profile_cmd(const Options& o, std::ostream& out, std::ostream& err) {
  FrequencyIndex index = [&] {
    if (!o.index.empty()) return FrequencyIndex::read_file(o.index);
    if (o.corpus.empty()) throw Error("profile needs --index or --corpus");
    std::vector<LemmaStream> streams;
    for (const auto& p : o.corpus) streams.push_back(read_lemma_stream(p));
    return FrequencyIndex::build(concat(std::move(streams)), o.corpus.front(), thread_count(o.threads));
  }();
  std::ifstream in(o.passages, std::ios::binary);
  if (!in) throw Error("cannot open " + o.passages);
  const auto passages = read_passages_jsonl(in, o.passages);

  ProfileOptions options;
  options.rare_threshold = o.rare_threshold;
  options.bands = parse_risk_bands(o.risk_bands);
  options.mode = o.unique_lemmas ? CountingMode::UniqueLemma : CountingMode::Token;
  std::vector<PassageProfile> profiles;
  for (const auto& p : passages) profiles.push_back(profile(p, index, options));

  std::ostringstream text;
  write_profiles_csv(text, profiles);
  emit(o, out, text.str());
  err << "profiled " << profiles.size() << " passages against " << index.total_tokens()
      << " corpus tokens (rare: frequency < " << o.rare_threshold << ", "
      << (o.unique_lemmas ? "unique lemmas" : "token counting") << ")\n";
  return kOk;
}

int score_cmd(const Options& o, std::ostream& out, std::ostream& err) {
  Dataset d;
  for (const auto& path : o.annotations) {
    auto records = read_annotations(csv::read_file(path));
    d.annotations.insert(d.annotations.end(), records.begin(), records.end());
  }
  std::sort(d.annotations.begin(), d.annotations.end(),
            [](const auto& a, const auto& b) { return a.key < b.key; });
  for (std::size_t i = 1; i < d.annotations.size(); ++i) {
    if (d.annotations[i].key == d.annotations[i - 1].key) {
      throw Error("duplicate translation key " + to_string(d.annotations[i].key));
    }
  }
  if (d.annotations.empty()) throw Error("no annotated translations");
  for (const auto& r : d.annotations) {
    ScoredTranslation s = score(r);
    s.stored_rating = rate_scheme1(s.tqs);
    d.translations.push_back(std::move(s));
  }

  if (!o.out.empty()) {
    std::ofstream file(o.out, std::ios::binary);
    if (!file) throw Error("cannot write " + o.out);
    write_severity_fixture(file, d.translations);
    err << "wrote " << d.translations.size() << " scored translations to " << o.out << '\n';
  }

  report::Spec spec = base_spec(o);
  spec.tables = {"T2", "T5", "T6"};
  const bool has_baseline = [&] {
    const auto texts = d.texts();
    return std::find(texts.begin(), texts.end(), spec.baseline_text) != texts.end();
  }();
  if (has_baseline && !spec.strata.empty()) {
    spec.tables.push_back("T3");
    spec.tables.push_back("S4");
  }
  if (!has_baseline) spec.tables = {"T2", "T5"};
  out << report::render(report::build(spec, d), spec.format);
  return kOk;
}

int metrics_cmd(const Options& o, std::ostream& out, std::ostream& err) {
  const BleuSmoothing smoothing = parse_smoothing(o.smoothing);
  const auto scores = score_pair_file(o.pairs, smoothing, thread_count(o.threads));
  std::ostringstream text;
  const std::vector<std::string> comments{"smoothing=" + std::string(to_string(smoothing)),
                                          "tokenizer=nfc-lower-whitespace-punct"};
  write_metric_scores(text, scores, comments);
  emit(o, out, text.str());
  err << "scored " << scores.size() << " metric values (BLEU smoothing " << to_string(smoothing) << ")\n";
  return kOk;
}

int correlate_cmd(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.bootstrap && !o.seed) throw Error("--bootstrap needs an explicit --seed");
  std::vector<std::string> inputs = o.mqm;
  inputs.insert(inputs.end(), o.metric_files.begin(), o.metric_files.end());
  inputs.insert(inputs.end(), o.profiles.begin(), o.profiles.end());
  LoadOptions lo;
  lo.strict = o.strict;
  lo.bands = parse_risk_bands(o.risk_bands);
  const auto paths = as_paths(inputs);
  const LoadResult loaded = load(paths, lo);
  print_warnings(loaded.warnings, err);

  report::Spec spec = base_spec(o);
  if (!o.bootstrap) spec.seed.reset();
  if (!o.metric_files.empty()) {
    spec.tables.push_back("T4");
    if (o.by_text) spec.tables.push_back("T8");
  }
  if (!o.profiles.empty()) spec.tables.push_back("T7");
  if (spec.tables.empty()) throw Error("correlate needs --metrics and/or --profiles");
  emit(o, out, report::render(report::build(spec, loaded.dataset), spec.format));
  return kOk;
}

std::vector<std::string> split_tables(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    for (std::string t; std::getline(ss, t, ',');) {
      if (!t.empty()) out.push_back(t);
    }
  }
  return out;
}

std::vector<std::string> data_paths(const Options& o) {
  if (!o.data.empty()) return o.data;
  return {PHILOSCOPE_DEFAULT_FIXTURES};
}

int report_cmd(const Options& o, std::ostream& out, std::ostream& err) {
  LoadOptions lo;
  lo.strict = o.strict;
  lo.bands = parse_risk_bands(o.risk_bands);
  const auto paths = as_paths(data_paths(o));
  const LoadResult loaded = load(paths, lo);
  print_warnings(loaded.warnings, err);

  report::Spec spec = base_spec(o);
  spec.tables = split_tables(o.tables);
  const report::Report rep = report::build(spec, loaded.dataset);
  if (!o.explain.empty()) {
    out << report::explain(rep, o.explain);
    return kOk;
  }
  emit(o, out, report::render(rep, spec.format));
  return kOk;
}

int verify_cmd(const Options& o, std::ostream& out, std::ostream& err) {
  LoadOptions lo;
  lo.strict = o.strict;
  lo.bands = parse_risk_bands(o.risk_bands);
  const auto paths = as_paths(data_paths(o));
  const LoadResult loaded = load(paths, lo);
  print_warnings(loaded.warnings, err);
  const VerifyReport rep = verify_fixtures(loaded.dataset);

  std::ostringstream text;
  if (report::parse_format(o.format) == report::Format::Csv) {
    csv::write_row(text, {"check", "location", "stored", "recomputed", "known"});
    for (const auto& d : rep.diffs) {
      csv::write_row(text, {d.check, d.location, d.stored, d.recomputed, d.known ? "yes" : "no"});
    }
  } else {
    text << "fixture version: "
         << (loaded.dataset.version.empty() ? std::string("unversioned") : loaded.dataset.version) << '\n'
         << "checks: " << rep.checks << ", diffs: " << rep.diffs.size()
         << ", unexplained: " << rep.unexplained() << '\n';
    for (const auto& d : rep.diffs) {
      text << (d.known ? "known  " : "DIFF   ") << d.check << " at " << d.location << ": stored "
           << d.stored << ", recomputed " << d.recomputed << '\n';
    }
  }
  emit(o, out, text.str());
  if (rep.unexplained() > 0 && o.strict) return kVerifyDiff;
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"philoscope: translation quality, terminology rarity and metric statistics"};
  app.name("philoscope");
  app.require_subcommand(1);
  app.set_config("--config", "", "Key-value config file (TOML style); flags override it");
  app.add_option("--format", o.format, "Output format: markdown or csv")->capture_default_str();
  app.add_option("--seed", o.seed, "Seed for randomized procedures");
  app.add_flag("--strict", o.strict, "Treat cross-table disagreements and diffs as failures");
  app.add_option("--threads", o.threads, "Worker threads (0 = hardware)");

  auto* idx = app.add_subcommand("index-corpus", "Build a lemma frequency index from a lemmatized corpus");
  idx->add_option("--corpus", o.corpus, "LemmaStream JSONL or TSV file(s)")->required()->check(CLI::ExistingFile);
  idx->add_option("--out", o.out, "Index file to write (default stdout)");
  idx->add_option("--label", o.label, "Source label recorded with the index");

  auto* prof = app.add_subcommand("profile", "Terminology rarity profile per passage");
  auto* index_opt = prof->add_option("--index", o.index, "Frequency index file")->check(CLI::ExistingFile);
  prof->add_option("--corpus", o.corpus, "Build the index from this corpus instead")->check(CLI::ExistingFile)->excludes(index_opt);
  prof->add_option("--passages", o.passages, "Passage lemmas JSONL")->required()->check(CLI::ExistingFile);
  prof->add_option("--rare-threshold", o.rare_threshold, "Rare when frequency < threshold")->capture_default_str();
  prof->add_option("--risk-bands", o.risk_bands, "Elevated and critical boundaries")->capture_default_str();
  prof->add_flag("--unique-lemmas", o.unique_lemmas, "Count each distinct lemma once");
  prof->add_option("--out", o.out, "CSV to write (default stdout)");

  auto* sc = app.add_subcommand("score", "MQM TQS and ratings from error annotations");
  sc->add_option("--annotations", o.annotations, "Annotation CSV file(s)")->required()->check(CLI::ExistingFile);
  sc->add_option("--exclude", o.excludes, "Stratum, e.g. Comp:8,Comp:10 (repeatable)");
  sc->add_option("--baseline", o.baseline, "Baseline text for gaps")->capture_default_str();
  sc->add_option("--out", o.out, "Write per-translation scores as a severity CSV");

  auto* met = app.add_subcommand("metrics", "Native BLEU-4, chrF++ and ROUGE-L for hypothesis/reference files");
  met->add_option("--pairs", o.pairs, "Pairs CSV")->required()->check(CLI::ExistingFile);
  met->add_option("--smoothing", o.smoothing, "BLEU smoothing: none or add1")->capture_default_str();
  met->add_option("--out", o.out, "Metric CSV to write (default stdout)");

  auto* cor = app.add_subcommand("correlate", "Metric and rarity correlations against MQM TQS");
  cor->add_option("--mqm", o.mqm, "Severity or annotation CSV")->required()->check(CLI::ExistingPath);
  cor->add_option("--metrics", o.metric_files, "Metric CSV (wide or long)")->check(CLI::ExistingPath);
  cor->add_option("--profiles", o.profiles, "Rarity profile CSV")->check(CLI::ExistingPath);
  cor->add_flag("--by-text", o.by_text, "Add per-text correlations");
  cor->add_option("--bootstrap", o.bootstrap, "Bootstrap resamples for the R^2 CI (needs --seed)");
  cor->add_option("--risk-bands", o.risk_bands, "Elevated and critical boundaries")->capture_default_str();
  cor->add_option("--baseline", o.baseline, "Baseline text")->capture_default_str();
  cor->add_option("--out", o.out, "File to write (default stdout)");

  auto* rep = app.add_subcommand("report", "Render result tables");
  rep->add_option("--data", o.data, "Fixture files or directories (default: bundled fixtures)");
  rep->add_option("--tables", o.tables, "Table ids, comma separated, or 'all'")->delimiter(',');
  rep->add_option("--exclude", o.excludes, "Stratum, e.g. Comp:8,Comp:10 (repeatable)");
  rep->add_option("--explain", o.explain, "Explain one cell: <table>:<row>:<column>");
  rep->add_option("--baseline", o.baseline, "Baseline text")->capture_default_str();
  rep->add_option("--bootstrap", o.bootstrap, "Bootstrap resamples for T7 (with --seed)");
  rep->add_option("--smoothing", o.smoothing, "BLEU smoothing echoed in the header")->capture_default_str();
  rep->add_option("--rare-threshold", o.rare_threshold, "Rare threshold echoed in the header")->capture_default_str();
  rep->add_option("--risk-bands", o.risk_bands, "Elevated and critical boundaries")->capture_default_str();
  rep->add_option("--out", o.out, "File to write (default stdout)");

  auto* ver = app.add_subcommand("verify", "Recompute derivable fixture values and diff them");
  ver->add_option("--data", o.data, "Fixture files or directories (default: bundled fixtures)");
  ver->add_option("--risk-bands", o.risk_bands, "Elevated and critical boundaries")->capture_default_str();
  ver->add_option("--out", o.out, "File to write (default stdout)");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  try {
    if (idx->parsed()) return index_corpus(o, out, err);
    if (prof->parsed()) return profile_cmd(o, out, err);
    if (sc->parsed()) return score_cmd(o, out, err);
    if (met->parsed()) return metrics_cmd(o, out, err);
    if (cor->parsed()) return correlate_cmd(o, out, err);
    if (rep->parsed()) return report_cmd(o, out, err);
    if (ver->parsed()) return verify_cmd(o, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace philoscope::cli

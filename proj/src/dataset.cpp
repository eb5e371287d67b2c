#include "philoscope/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "philoscope/csv.hpp"
#include "philoscope/error.hpp"
#include "philoscope/numeric_format.hpp"
#include "philoscope/sha256.hpp"
#include "philoscope/unicode.hpp"

namespace philoscope {
namespace fs = std::filesystem;
namespace {

constexpr const char* kVersionFile = "VERSION";
constexpr const char* kManifestFile = "fixtures.sha256";

enum class Role {
  Severity,
  Annotations,
  LongMetrics,
  WideMetrics,
  Profiles,
  Discrepancies,
  Aggregates,
  PublishedSeverity,
};

const std::vector<std::string> kProfileColumns{"text", "passage", "terms", "avg_zipf", "rare",
                                               "not_found"};
const std::vector<std::string> kDiscrepancyColumns{"text",      "passage", "model", "field",
                                                   "canonical", "other",   "other_source"};
const std::vector<std::string> kAggregateColumns{"text", "model", "tqs_mean", "tqs_sd",
                                                 "critical"};
const std::vector<std::string> kPublishedSeverityColumns{"text", "severity", "count"};

bool is_wide_metric_table(const csv::Table& t) {
  if (!t.has_columns({"text", "passage", "model"}) || t.column("metric")) return false;
  bool payload = false;
  for (const auto& h : t.header) {
    if (h == "text" || h == "passage" || h == "model") continue;
    if (h == "tqs" || h == "rating" || try_parse_metric(h)) {
      payload = true;
      continue;
    }
    return false;
  }
  return payload;
}

Role sniff(const csv::Table& t) {
  if (t.has_columns(kSeverityColumns)) return Role::Severity;
  if (t.has_columns(kAnnotationColumns)) return Role::Annotations;
  if (t.has_columns(kMetricColumns)) return Role::LongMetrics;
  if (t.has_columns(kProfileColumns)) return Role::Profiles;
  if (t.has_columns(kDiscrepancyColumns)) return Role::Discrepancies;
  if (t.has_columns(kAggregateColumns)) return Role::Aggregates;
  if (t.has_columns(kPublishedSeverityColumns)) return Role::PublishedSeverity;
  if (is_wide_metric_table(t)) return Role::WideMetrics;
  std::string header;
  for (const auto& h : t.header) header += (header.empty() ? "" : ",") + h;
  throw Error(t.source + ": unrecognised CSV header '" + header + "'");
}

TranslationKey read_key(const csv::Row& row) {
  TranslationKey key;
  key.text = row.required_text("text");
  const long long passage = row.integer("passage");
  if (passage < 1) row.fail("passage", "must be >= 1");
  key.passage = static_cast<int>(passage);
  key.model = row.required_text("model");
  return key;
}

std::optional<double> optional_real(const csv::Row& row, std::string_view name) {
  if (!row.has(name) || unicode::trim(row.text(name)).empty()) return std::nullopt;
  return row.real(name);
}

int non_negative(const csv::Row& row, std::string_view name) {
  const long long v = row.integer(name);
  if (v < 0) row.fail(name, "must be >= 0");
  return static_cast<int>(v);
}

// Both the wide and long metric layouts produce ingested scores.
void read_wide_metrics(const csv::Table& t, Dataset& d, std::vector<std::string>& tqs_sources) {
  std::set<TranslationKey> seen;
  for (const auto& rec : t.rows) {
    const csv::Row row(t, rec);
    const TranslationKey key = read_key(row);
    if (!seen.insert(key).second) row.fail("duplicate translation key " + to_string(key));
    MetricTableTqs extra{key, optional_real(row, "tqs"), std::nullopt};
    if (row.has("rating")) {
      if (auto r = unicode::trim(row.text("rating")); !r.empty()) {
        try {
          extra.rating = parse_rating(r);
        } catch (const Error& e) {
          row.fail("rating", e.what());
        }
      }
    }
    if (extra.tqs || extra.rating) {
      d.metric_table_tqs.push_back(std::move(extra));
      tqs_sources.push_back(fs::path(t.source).filename().string());
    }
    for (const auto& h : t.header) {
      const auto metric = try_parse_metric(h);
      if (!metric) continue;
      const auto value = optional_real(row, h);
      if (!value) continue;
      d.metric_scores.push_back(
          {key, MetricScore::make(*metric, *value, std::nullopt, Provenance::Ingested)});
    }
  }
}

void read_profiles(const csv::Table& t, Dataset& d, const RiskBands& bands) {
  for (const auto& rec : t.rows) {
    const csv::Row row(t, rec);
    ProfileRecord p;
    const auto count = [&](const char* name) {
      const long long v = row.integer(name);
      if (v < 0) row.fail(name, "must be >= 0");
      return static_cast<std::uint64_t>(v);
    };
    try {
      p.profile = profile_from_counts(row.required_text("text"), row.required_text("passage"),
                                      count("terms"), row.real("avg_zipf"), count("rare"),
                                      count("not_found"), bands);
    } catch (const Error& e) {
      const std::string what = e.what();
      if (what.starts_with(t.source + ":")) throw;
      row.fail(what);
    }
    p.stored_rare_ratio = optional_real(row, "rare_ratio");
    p.stored_nf_ratio = optional_real(row, "nf_ratio");
    if (row.has("risk")) {
      if (auto r = unicode::trim(row.text("risk")); !r.empty()) {
        try {
          p.stored_risk = parse_risk(r);
        } catch (const Error& e) {
          row.fail("risk", e.what());
        }
      }
    }
    d.profiles.push_back(std::move(p));
  }
}

void read_discrepancies(const csv::Table& t, Dataset& d) {
  for (const auto& rec : t.rows) {
    const csv::Row row(t, rec);
    // Passage-level fields (profile ratios, risk) leave the model empty.
    const std::string field = row.required_text("field");
    TranslationKey key;
    key.text = row.required_text("text");
    const long long passage = row.integer("passage");
    if (passage < 1) row.fail("passage", "must be >= 1");
    key.passage = static_cast<int>(passage);
    key.model = unicode::trim(row.text("model"));
    const bool passage_level = field == "rare_ratio" || field == "nf_ratio" || field == "risk";
    if (key.model.empty() != passage_level) {
      row.fail("model", passage_level ? "must be empty for passage-level field " + field
                                      : "required for field " + field);
    }
    d.known_discrepancies.push_back({std::move(key), field,
                                     unicode::trim(row.text("canonical")),
                                     unicode::trim(row.text("other")),
                                     unicode::trim(row.text("other_source"))});
  }
}

void read_aggregates(const csv::Table& t, Dataset& d) {
  for (const auto& rec : t.rows) {
    const csv::Row row(t, rec);
    PublishedAggregate a;
    a.text = row.required_text("text");
    a.model = row.required_text("model");
    if (a.model == "Aggregate") a.model.clear();
    a.tqs_mean = row.real("tqs_mean");
    a.tqs_sd = row.real("tqs_sd");
    a.critical = non_negative(row, "critical");
    d.published_aggregates.push_back(std::move(a));
  }
}

void read_published_severity(const csv::Table& t, Dataset& d) {
  for (const auto& rec : t.rows) {
    const csv::Row row(t, rec);
    PublishedSeverity s;
    s.text = row.required_text("text");
    const std::string sev = row.required_text("severity");
    if (sev != "Total") {
      try {
        s.severity = parse_severity(sev);
      } catch (const Error& e) {
        row.fail("severity", e.what());
      }
    }
    s.count = non_negative(row, "count");
    d.published_severity.push_back(std::move(s));
  }
}

void read_version(const fs::path& path, Dataset& d) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  bool have_version = false;
  while (std::getline(in, line)) {
    ++line_no;
    line = unicode::trim(line);
    if (line.empty() || line.front() == '#') continue;
    if (!have_version) {
      d.version = line;
      have_version = true;
      continue;
    }
    std::istringstream fields(line);
    std::string tag;
    std::string file;
    std::size_t rows = 0;
    if (!(fields >> tag >> file >> rows) || tag != "rows") {
      throw Error(path.string() + ":" + std::to_string(line_no) +
                  ": expected 'rows <file> <count>'");
    }
    d.expected_rows[file] = rows;
  }
  if (!have_version) throw Error(path.string() + ": no version line");
}

std::vector<fs::path> expand(std::span<const fs::path> paths) {
  std::vector<fs::path> files;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> inside;
      for (const auto& entry : fs::directory_iterator(p)) {
        if (!entry.is_regular_file()) continue;
        const auto name = entry.path().filename().string();
        if (entry.path().extension() == ".csv" || name == kVersionFile || name == kManifestFile) {
          inside.push_back(entry.path());
        }
      }
      std::sort(inside.begin(), inside.end());
      files.insert(files.end(), inside.begin(), inside.end());
    } else if (fs::is_regular_file(p)) {
      files.push_back(p);
    } else {
      throw Error(p.string() + ": no such file or directory");
    }
  }
  std::sort(files.begin(), files.end());
  files.erase(std::unique(files.begin(), files.end()), files.end());
  return files;
}

std::string fmt(double v) { return format_exact(v); }

}  // namespace

// ---------------------------------------------------------------- Dataset

const ScoredTranslation* Dataset::find(const TranslationKey& key) const {
  auto it = std::lower_bound(translations.begin(), translations.end(), key,
                             [](const ScoredTranslation& t, const TranslationKey& k) { return t.key < k; });
  if (it != translations.end() && it->key == key) return &*it;
  for (const auto& t : translations) {
    if (t.key == key) return &t;
  }
  return nullptr;
}

const KnownDiscrepancy* Dataset::known(const TranslationKey& key, std::string_view field) const {
  for (const auto& k : known_discrepancies) {
    if (k.key == key && k.field == field) return &k;
  }
  return nullptr;
}

std::vector<PassageProfile> Dataset::passage_profiles() const {
  std::vector<PassageProfile> out;
  for (const auto& p : profiles) out.push_back(p.profile);
  return out;
}

std::vector<std::string> Dataset::texts() const {
  std::set<std::string> names;
  for (const auto& t : translations) names.insert(t.key.text);
  std::vector<std::string> out;
  if (names.count("Mix")) {
    out.push_back("Mix");
    names.erase("Mix");
  }
  out.insert(out.end(), names.begin(), names.end());
  return out;
}

bool operator==(const Dataset& a, const Dataset& b) {
  return a.translations == b.translations && a.annotations == b.annotations &&
         a.metric_scores == b.metric_scores && a.metric_table_tqs == b.metric_table_tqs &&
         a.profiles == b.profiles && a.known_discrepancies == b.known_discrepancies &&
         a.published_aggregates == b.published_aggregates &&
         a.published_severity == b.published_severity && a.version == b.version;
}

// ---------------------------------------------------------------- manifest

std::map<std::string, std::string> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (unicode::trim(line).empty()) continue;
    const auto space = line.find(' ');
    if (space != 64 || line.size() < 67) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": expected '<sha256>  <file>'");
    }
    std::string digest = line.substr(0, 64);
    std::string name = line.substr(66);
    if (line[65] != ' ' && line[65] != '*') {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": expected '<sha256>  <file>'");
    }
    std::transform(digest.begin(), digest.end(), digest.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    out[name] = digest;
  }
  return out;
}

void write_manifest(const fs::path& dir, std::span<const std::string> files) {
  std::vector<std::string> sorted(files.begin(), files.end());
  std::sort(sorted.begin(), sorted.end());
  std::ofstream out(dir / kManifestFile, std::ios::binary);
  if (!out) throw Error("cannot write " + (dir / kManifestFile).string());
  for (const auto& f : sorted) out << sha256_file(dir / f) << "  " << f << '\n';
}

// ---------------------------------------------------------------- load

LoadResult load(std::span<const fs::path> paths, const LoadOptions& options) {
  const auto files = expand(paths);
  if (files.empty()) throw Error("no input files");

  LoadResult result;
  Dataset& d = result.dataset;
  std::vector<std::string>& warnings = result.warnings;
  std::vector<std::string> problems;  // cross-table errors under strict
  auto flag = [&](std::string message, bool hard) {
    if (hard) {
      problems.push_back(std::move(message));
    } else {
      warnings.push_back(std::move(message));
    }
  };

  std::vector<TranslationRecord> annotations;
  std::vector<std::string> tqs_sources;
  for (const auto& file : files) {
    const std::string name = file.filename().string();
    if (name == kManifestFile) {
      for (const auto& [listed, digest] : read_manifest(file)) {
        const fs::path target = file.parent_path() / listed;
        if (!fs::exists(target)) {
          flag(file.string() + ": listed file " + listed + " is missing", options.strict);
        } else if (sha256_file(target) != digest) {
          flag(target.string() + ": checksum does not match " + name, options.strict);
        }
      }
      continue;
    }
    if (name == kVersionFile) {
      read_version(file, d);
      continue;
    }
    if (file.extension() != ".csv") throw Error(file.string() + ": expected a .csv file");

    const csv::Table table = csv::read_file(file);
    d.row_counts[name] += table.rows.size();
    switch (sniff(table)) {
      case Role::Severity: {
        auto rows = read_severity_fixture(table);
        d.translations.insert(d.translations.end(), rows.begin(), rows.end());
        break;
      }
      case Role::Annotations: {
        auto rows = read_annotations(table);
        annotations.insert(annotations.end(), rows.begin(), rows.end());
        break;
      }
      case Role::LongMetrics: {
        auto rows = read_metric_scores(table);
        d.metric_scores.insert(d.metric_scores.end(), rows.begin(), rows.end());
        break;
      }
      case Role::WideMetrics: read_wide_metrics(table, d, tqs_sources); break;
      case Role::Profiles: read_profiles(table, d, options.bands); break;
      case Role::Discrepancies: read_discrepancies(table, d); break;
      case Role::Aggregates: read_aggregates(table, d); break;
      case Role::PublishedSeverity: read_published_severity(table, d); break;
    }
  }

  std::sort(annotations.begin(), annotations.end(),
            [](const auto& a, const auto& b) { return a.key < b.key; });
  for (const auto& r : annotations) d.translations.push_back(score(r));
  d.annotations = std::move(annotations);

  std::sort(d.translations.begin(), d.translations.end(),
            [](const auto& a, const auto& b) { return a.key < b.key; });
  for (std::size_t i = 1; i < d.translations.size(); ++i) {
    if (d.translations[i].key == d.translations[i - 1].key) {
      throw Error("duplicate translation key " + to_string(d.translations[i].key));
    }
  }

  std::sort(d.metric_scores.begin(), d.metric_scores.end());
  for (std::size_t i = 1; i < d.metric_scores.size(); ++i) {
    const auto& a = d.metric_scores[i - 1];
    const auto& b = d.metric_scores[i];
    if (a.key == b.key && a.score.metric == b.score.metric &&
        a.score.reference_id == b.score.reference_id) {
      throw Error("duplicate " + std::string(to_string(b.score.metric)) + " score for " +
                  to_string(b.key) + (b.score.reference_id ? " reference " + *b.score.reference_id : ""));
    }
  }

  // Every metric row must join a translation.
  std::set<std::string> unmatched;
  for (const auto& s : d.metric_scores) {
    if (!d.find(s.key)) unmatched.insert(to_string(s.key));
  }
  for (const auto& m : d.metric_table_tqs) {
    if (!d.find(m.key)) unmatched.insert(to_string(m.key));
  }
  if (!unmatched.empty()) {
    std::string list;
    for (const auto& k : unmatched) list += (list.empty() ? "" : ", ") + k;
    throw Error("metric rows without a matching translation: " + list);
  }

  // Cross-table agreement; the severity table is canonical.
  for (std::size_t i = 0; i < d.metric_table_tqs.size(); ++i) {
    const auto& m = d.metric_table_tqs[i];
    const ScoredTranslation* t = d.find(m.key);
    const std::string& source = tqs_sources[i];
    if (m.tqs && std::abs(*m.tqs - t->tqs) > 1e-9) {
      const bool known = d.known(m.key, "tqs") != nullptr;
      flag(to_string(m.key) + ": tqs " + fmt(*m.tqs) + " in " + source +
               " disagrees with canonical " + fmt(t->tqs) + (known ? " (known discrepancy)" : ""),
           options.strict && !known);
    }
    if (m.rating && t->stored_rating && *m.rating != *t->stored_rating) {
      const bool known = d.known(m.key, "rating") != nullptr;
      flag(to_string(m.key) + ": rating " + std::string(to_string(*m.rating)) + " in " + source +
               " disagrees with canonical " + std::string(to_string(*t->stored_rating)) +
               (known ? " (known discrepancy)" : ""),
           options.strict && !known);
    }
  }
  if (!problems.empty()) {
    std::sort(problems.begin(), problems.end());
    std::string message = "cross-table disagreement (strict):";
    for (const auto& p : problems) message += "\n  " + p;
    throw Error(message);
  }

  std::sort(d.metric_table_tqs.begin(), d.metric_table_tqs.end(),
            [](const auto& a, const auto& b) { return a.key < b.key; });
  std::sort(d.profiles.begin(), d.profiles.end(), [](const auto& a, const auto& b) {
    return std::tie(a.profile.text_id, a.profile.passage_id) <
           std::tie(b.profile.text_id, b.profile.passage_id);
  });
  for (std::size_t i = 1; i < d.profiles.size(); ++i) {
    const auto& a = d.profiles[i - 1].profile;
    const auto& b = d.profiles[i].profile;
    if (a.text_id == b.text_id && a.passage_id == b.passage_id) {
      throw Error("duplicate profile for passage " + b.text_id + ":" + b.passage_id);
    }
  }
  std::sort(d.known_discrepancies.begin(), d.known_discrepancies.end(),
            [](const auto& a, const auto& b) { return std::tie(a.key, a.field) < std::tie(b.key, b.field); });
  std::sort(d.published_aggregates.begin(), d.published_aggregates.end(),
            [](const auto& a, const auto& b) { return std::tie(a.text, a.model) < std::tie(b.text, b.model); });
  std::sort(d.published_severity.begin(), d.published_severity.end(), [](const auto& a, const auto& b) {
    const int sa = a.severity ? static_cast<int>(*a.severity) : 99;
    const int sb = b.severity ? static_cast<int>(*b.severity) : 99;
    return std::tie(a.text, sa) < std::tie(b.text, sb);
  });
  std::sort(warnings.begin(), warnings.end());
  return result;
}

// ---------------------------------------------------------------- save

void save(const Dataset& d, const fs::path& dir) {
  fs::create_directories(dir);
  std::vector<std::string> written;
  auto open = [&](const std::string& name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / name).string());
    written.push_back(name);
    return out;
  };

  std::set<TranslationKey> annotated;
  for (const auto& r : d.annotations) annotated.insert(r.key);
  std::vector<ScoredTranslation> plain;
  for (const auto& t : d.translations) {
    if (!annotated.count(t.key)) plain.push_back(t);
  }
  if (!plain.empty()) {
    auto out = open("translations.csv");
    write_severity_fixture(out, plain);
  }
  if (!d.annotations.empty()) {
    auto out = open("annotations.csv");
    write_annotations(out, d.annotations);
  }
  if (!d.metric_scores.empty()) {
    auto out = open("metrics.csv");
    write_metric_scores(out, d.metric_scores);
  }
  if (!d.metric_table_tqs.empty()) {
    auto out = open("metric_table_tqs.csv");
    csv::write_row(out, {"text", "passage", "model", "tqs", "rating"});
    for (const auto& m : d.metric_table_tqs) {
      csv::write_row(out, {m.key.text, std::to_string(m.key.passage), m.key.model,
                           m.tqs ? fmt(*m.tqs) : "",
                           m.rating ? std::string(to_string(*m.rating)) : ""});
    }
  }
  if (!d.profiles.empty()) {
    auto out = open("profiles.csv");
    csv::write_row(out, {"text", "passage", "terms", "avg_zipf", "rare_ratio", "rare", "not_found",
                         "nf_ratio", "risk"});
    for (const auto& r : d.profiles) {
      const auto& p = r.profile;
      csv::write_row(out, {p.text_id, p.passage_id, std::to_string(p.term_count), fmt(p.avg_zipf),
                           r.stored_rare_ratio ? fmt(*r.stored_rare_ratio) : "",
                           std::to_string(p.rare_count), std::to_string(p.not_found_count),
                           r.stored_nf_ratio ? fmt(*r.stored_nf_ratio) : "",
                           r.stored_risk ? std::string(to_string(*r.stored_risk)) : ""});
    }
  }
  if (!d.known_discrepancies.empty()) {
    auto out = open("known_discrepancies.csv");
    csv::write_row(out, kDiscrepancyColumns);
    for (const auto& k : d.known_discrepancies) {
      csv::write_row(out, {k.key.text, std::to_string(k.key.passage), k.key.model, k.field,
                           k.canonical, k.other, k.other_source});
    }
  }
  if (!d.published_aggregates.empty()) {
    auto out = open("published_aggregates.csv");
    csv::write_row(out, kAggregateColumns);
    for (const auto& a : d.published_aggregates) {
      csv::write_row(out, {a.text, a.model.empty() ? "Aggregate" : a.model, fmt(a.tqs_mean),
                           fmt(a.tqs_sd), std::to_string(a.critical)});
    }
  }
  if (!d.published_severity.empty()) {
    auto out = open("published_severity.csv");
    csv::write_row(out, kPublishedSeverityColumns);
    for (const auto& s : d.published_severity) {
      csv::write_row(out, {s.text, s.severity ? std::string(to_string(*s.severity)) : "Total",
                           std::to_string(s.count)});
    }
  }
  if (!d.version.empty()) {
    auto out = open(kVersionFile);
    out << d.version << '\n';
  }
  write_manifest(dir, written);
}

// ---------------------------------------------------------------- verify

std::size_t VerifyReport::unexplained() const {
  return static_cast<std::size_t>(
      std::count_if(diffs.begin(), diffs.end(), [](const auto& d) { return !d.known; }));
}

VerifyReport verify_fixtures(const Dataset& d) {
  VerifyReport report;
  auto diff = [&](std::string check, std::string location, std::string stored,
                  std::string recomputed, bool known = false) {
    report.diffs.push_back(
        {std::move(check), std::move(location), std::move(stored), std::move(recomputed), known});
  };

  for (const auto& t : d.translations) {
    if (t.stored_rating) {
      ++report.checks;
      if (t.scheme1() != *t.stored_rating) {
        diff("rating", to_string(t.key), std::string(to_string(*t.stored_rating)),
             std::string(to_string(t.scheme1())), d.known(t.key, "rating") != nullptr);
      }
    }
    if (t.word_count) {
      ++report.checks;
      const double recomputed = round_half_up(tqs(t.counts, *t.word_count), 1);
      if (std::abs(recomputed - t.tqs) > 0.05 + 1e-9) {
        diff("word-count tqs", to_string(t.key), fmt(t.tqs), format_fixed(recomputed, 1));
      }
    }
  }

  for (const auto& m : d.metric_table_tqs) {
    const ScoredTranslation* t = d.find(m.key);
    if (!t) continue;
    if (m.tqs) {
      ++report.checks;
      if (std::abs(*m.tqs - t->tqs) > 1e-9) {
        diff("metric-table tqs", to_string(m.key), fmt(*m.tqs), fmt(t->tqs),
             d.known(m.key, "tqs") != nullptr);
      }
    }
    if (m.rating) {
      ++report.checks;
      if (*m.rating != t->scheme1()) {
        diff("metric-table rating", to_string(m.key), std::string(to_string(*m.rating)),
             std::string(to_string(t->scheme1())), d.known(m.key, "rating") != nullptr);
      }
    }
  }

  if (!d.translations.empty() && !d.published_aggregates.empty()) {
    const AggregateReport agg = aggregate(d.translations);
    for (const auto& p : d.published_aggregates) {
      const std::string where = p.text + "/" + (p.model.empty() ? "Aggregate" : p.model);
      const GroupSummary* g = nullptr;
      for (const auto& candidate : agg.groups) {
        if (candidate.text == p.text && candidate.model == p.model) g = &candidate;
      }
      report.checks += 3;
      if (!g) {
        diff("published group", where, "present", "no translations");
        continue;
      }
      if (std::abs(g->mean_tqs - p.tqs_mean) > 0.05 + 1e-9) {
        diff("published mean", where, fmt(p.tqs_mean), format_fixed(g->mean_tqs, 3));
      }
      if (std::abs(g->sd_tqs - p.tqs_sd) > 0.1 + 1e-9) {
        diff("published sd", where, fmt(p.tqs_sd), format_fixed(g->sd_tqs, 3));
      }
      if (g->severity.critical != p.critical) {
        diff("published critical", where + " critical", std::to_string(p.critical),
             std::to_string(g->severity.critical));
      }
    }
  }

  if (!d.published_severity.empty()) {
    const TypologyReport typ = severity_typology(d.translations);
    for (const auto& p : d.published_severity) {
      ++report.checks;
      const std::string label = p.severity ? std::string(to_string(*p.severity)) : "Total";
      const TextTypology* t = typ.find(p.text);
      const int recomputed = !t ? 0 : (p.severity ? t->severity.get(*p.severity) : t->total());
      if (recomputed != p.count) {
        diff("published severity", p.text + "/" + label, std::to_string(p.count),
             std::to_string(recomputed));
      }
    }
  }

  for (const auto& r : d.profiles) {
    const auto& p = r.profile;
    const std::string where = p.text_id + ":" + p.passage_id;
    auto known = [&](std::string_view field) {
      int passage = 0;
      const auto* end = p.passage_id.data() + p.passage_id.size();
      if (std::from_chars(p.passage_id.data(), end, passage).ptr != end) return false;
      return d.known(TranslationKey{p.text_id, passage, ""}, field) != nullptr;
    };
    if (r.stored_rare_ratio) {
      ++report.checks;
      if (std::abs(*r.stored_rare_ratio - p.rare_ratio) > 0.0005 + 1e-12) {
        diff("profile rare_ratio", where, fmt(*r.stored_rare_ratio), format_fixed(p.rare_ratio, 4),
             known("rare_ratio"));
      }
    }
    if (r.stored_nf_ratio) {
      ++report.checks;
      if (std::abs(*r.stored_nf_ratio - p.nf_ratio) > 0.0005 + 1e-12) {
        diff("profile nf_ratio", where, fmt(*r.stored_nf_ratio), format_fixed(p.nf_ratio, 4),
             known("nf_ratio"));
      }
    }
    if (r.stored_risk) {
      ++report.checks;
      if (*r.stored_risk != p.risk) {
        diff("profile risk", where, std::string(to_string(*r.stored_risk)),
             std::string(to_string(p.risk)), known("risk"));
      }
    }
  }

  for (const auto& [file, expected] : d.expected_rows) {
    ++report.checks;
    const auto it = d.row_counts.find(file);
    if (it == d.row_counts.end()) {
      diff("row count", file, std::to_string(expected), "not loaded");
    } else if (it->second != expected) {
      diff("row count", file, std::to_string(expected), std::to_string(it->second));
    }
  }
  return report;
}

}  // namespace philoscope

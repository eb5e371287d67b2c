#include "philoscope/mqm_scorer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>

#include "philoscope/csv.hpp"
#include "philoscope/error.hpp"
#include "philoscope/numeric_format.hpp"
#include "philoscope/unicode.hpp"

namespace philoscope {
namespace {

// Lowercase ASCII letters and digits only: "Term. Accuracy" -> "termaccuracy".
std::string fold(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

double sample_sd(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Baseline first, the rest in sorted order.
std::vector<std::string> ordered_texts(std::set<std::string> texts, std::string_view baseline) {
  std::vector<std::string> out;
  if (auto it = texts.find(std::string(baseline)); it != texts.end()) {
    out.push_back(*it);
    texts.erase(it);
  }
  out.insert(out.end(), texts.begin(), texts.end());
  return out;
}

}  // namespace

std::string_view to_string(ErrorType t) {
  return t == ErrorType::Terminology ? "Terminology" : "Accuracy";
}

std::string_view to_string(Subtype s) {
  switch (s) {
    case Subtype::TermAccuracy: return "TermAccuracy";
    case Subtype::TermConsistency: return "TermConsistency";
    case Subtype::Mistranslation: return "Mistranslation";
    case Subtype::Overtranslation: return "Overtranslation";
    case Subtype::Undertranslation: return "Undertranslation";
    case Subtype::Addition: return "Addition";
    case Subtype::Omission: return "Omission";
  }
  return "?";
}

std::string_view display_name(Subtype s) {
  switch (s) {
    case Subtype::TermAccuracy: return "Term. Accuracy";
    case Subtype::TermConsistency: return "Term. Consistency";
    default: return to_string(s);
  }
}

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::Neutral: return "Neutral";
    case Severity::Minor: return "Minor";
    case Severity::Major: return "Major";
    case Severity::Critical: return "Critical";
  }
  return "?";
}

std::string_view to_string(Rating r) {
  switch (r) {
    case Rating::HighPass: return "HP";
    case Rating::LowPass: return "LP";
    case Rating::Fail: return "F";
  }
  return "?";
}

std::string_view display_name(Rating r) {
  switch (r) {
    case Rating::HighPass: return "High Pass";
    case Rating::LowPass: return "Low Pass";
    case Rating::Fail: return "Fail";
  }
  return "?";
}

ErrorType parse_error_type(std::string_view text) {
  const std::string f = fold(text);
  if (f == "terminology") return ErrorType::Terminology;
  if (f == "accuracy") return ErrorType::Accuracy;
  throw Error("unknown error type '" + std::string(text) + "'");
}

Subtype parse_subtype(std::string_view text) {
  const std::string f = fold(text);
  if (f == "termaccuracy" || f == "terminologicalaccuracy") return Subtype::TermAccuracy;
  if (f == "termconsistency" || f == "terminologicalconsistency") return Subtype::TermConsistency;
  for (Subtype s : kSubtypes) {
    if (f == fold(to_string(s))) return s;
  }
  throw Error("unknown error subtype '" + std::string(text) + "'");
}

Severity parse_severity(std::string_view text) {
  const std::string f = fold(text);
  for (Severity s : kSeverities) {
    if (f == fold(to_string(s))) return s;
  }
  throw Error("unknown severity '" + std::string(text) + "'");
}

Rating parse_rating(std::string_view text) {
  const std::string f = fold(text);
  if (f == "hp" || f == "highpass") return Rating::HighPass;
  if (f == "lp" || f == "lowpass") return Rating::LowPass;
  if (f == "f" || f == "fail") return Rating::Fail;
  throw Error("unknown rating '" + std::string(text) + "'");
}

ErrorType error_type_of(Subtype subtype) {
  return (subtype == Subtype::TermAccuracy || subtype == Subtype::TermConsistency)
             ? ErrorType::Terminology
             : ErrorType::Accuracy;
}

int severity_weight(Severity severity) {
  switch (severity) {
    case Severity::Neutral: return 0;
    case Severity::Minor: return 1;
    case Severity::Major: return 5;
    case Severity::Critical: return 25;
  }
  return 0;
}

ErrorAnnotation ErrorAnnotation::make(ErrorType type, Subtype subtype, Severity severity,
                                      std::string note) {
  if (error_type_of(subtype) != type) {
    throw Error("subtype " + std::string(to_string(subtype)) + " does not belong to error type " +
                std::string(to_string(type)));
  }
  return ErrorAnnotation{type, subtype, severity, std::move(note)};
}

int SeverityCounts::get(Severity s) const {
  switch (s) {
    case Severity::Neutral: return neutral;
    case Severity::Minor: return minor;
    case Severity::Major: return major;
    case Severity::Critical: return critical;
  }
  return 0;
}

void SeverityCounts::add(Severity s, int n) {
  switch (s) {
    case Severity::Neutral: neutral += n; break;
    case Severity::Minor: minor += n; break;
    case Severity::Major: major += n; break;
    case Severity::Critical: critical += n; break;
  }
}

SeverityCounts& SeverityCounts::operator+=(const SeverityCounts& o) {
  neutral += o.neutral;
  minor += o.minor;
  major += o.major;
  critical += o.critical;
  return *this;
}

SeverityCounts TranslationRecord::severity_counts() const {
  SeverityCounts c;
  for (const auto& a : annotations) c.add(a.severity);
  return c;
}

double tqs(const SeverityCounts& counts, int word_count) {
  if (word_count <= 0) throw Error("tqs: word count must be positive");
  if (counts.neutral < 0 || counts.minor < 0 || counts.major < 0 || counts.critical < 0) {
    throw Error("tqs: negative error count");
  }
  const int penalty = severity_weight(Severity::Minor) * counts.minor +
                      severity_weight(Severity::Major) * counts.major +
                      severity_weight(Severity::Critical) * counts.critical;
  const double raw = 100.0 - static_cast<double>(penalty) / word_count * 100.0;
  return std::max(raw, 0.0);
}

Rating rate_scheme1(double score) {
  if (score >= 95.0) return Rating::HighPass;
  if (score >= 87.0) return Rating::LowPass;
  return Rating::Fail;
}

Rating rate_scheme2(double score, int critical_count) {
  return critical_count >= 1 ? Rating::Fail : rate_scheme1(score);
}

QualityResult assess(const TranslationRecord& record) {
  QualityResult q;
  q.severity_counts = record.severity_counts();
  q.tqs = tqs(q.severity_counts, record.word_count);
  q.has_critical = q.severity_counts.critical > 0;
  q.rating_scheme1 = rate_scheme1(q.tqs);
  q.rating_scheme2 = rate_scheme2(q.tqs, q.severity_counts.critical);
  return q;
}

ScoredTranslation score(const TranslationRecord& record) {
  ScoredTranslation s;
  s.key = record.key;
  s.counts = record.severity_counts();
  s.tqs = tqs(s.counts, record.word_count);
  s.word_count = record.word_count;
  return s;
}

// ---------------------------------------------------------------- strata

bool ExclusionRule::matches(const TranslationKey& key) const {
  return key.text == text && key.passage == passage && (!model || *model == key.model);
}

bool Stratum::excludes(const TranslationKey& key) const {
  return std::any_of(rules.begin(), rules.end(), [&](const auto& r) { return r.matches(key); });
}

std::string Stratum::label() const {
  if (rules.empty()) return "all passages";
  std::map<std::string, std::vector<std::string>> by_text;
  for (const auto& r : rules) {
    by_text[r.text].push_back(r.model ? *r.model + " on " + std::to_string(r.passage)
                                      : std::to_string(r.passage));
  }
  std::string out = "excl.";
  bool first_text = true;
  for (const auto& [text, items] : by_text) {
    out += first_text ? " " : "; ";
    first_text = false;
    out += text;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : " ") + items[i];
  }
  return out;
}

std::string Stratum::spec() const {
  std::string out;
  for (const auto& r : rules) {
    if (!out.empty()) out += ",";
    out += r.text + ":" + std::to_string(r.passage);
    if (r.model) out += ":" + *r.model;
  }
  return out;
}

Stratum parse_stratum(std::string_view spec) {
  Stratum stratum;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const auto comma = spec.find(',', pos);
    const std::string item =
        unicode::trim(spec.substr(pos, comma == std::string_view::npos ? spec.npos : comma - pos));
    pos = comma == std::string_view::npos ? spec.size() + 1 : comma + 1;
    if (item.empty()) continue;
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
      const auto colon = item.find(':', start);
      parts.push_back(item.substr(start, colon == std::string::npos ? colon : colon - start));
      if (colon == std::string::npos) break;
      start = colon + 1;
    }
    if (parts.size() < 2 || parts.size() > 3 || parts[0].empty()) {
      throw Error("exclusion '" + item + "': expected text:passage[:model]");
    }
    ExclusionRule rule;
    rule.text = parts[0];
    try {
      std::size_t used = 0;
      rule.passage = std::stoi(parts[1], &used);
      if (used != parts[1].size() || rule.passage < 1) throw Error("bad");
    } catch (const std::exception&) {
      throw Error("exclusion '" + item + "': passage must be a positive integer");
    }
    if (parts.size() == 3) {
      if (parts[2].empty()) throw Error("exclusion '" + item + "': empty model");
      rule.model = parts[2];
    }
    if (std::find(stratum.rules.begin(), stratum.rules.end(), rule) == stratum.rules.end()) {
      stratum.rules.push_back(std::move(rule));
    }
  }
  return stratum;
}

// ---------------------------------------------------------------- aggregation

void RatingTally::add(Rating r) {
  switch (r) {
    case Rating::HighPass: ++high_pass; break;
    case Rating::LowPass: ++low_pass; break;
    case Rating::Fail: ++fail; break;
  }
}

int RatingTally::count(Rating r) const {
  switch (r) {
    case Rating::HighPass: return high_pass;
    case Rating::LowPass: return low_pass;
    case Rating::Fail: return fail;
  }
  return 0;
}

double RatingTally::pass_rate() const {
  if (total() == 0) throw Error("pass rate of an empty group");
  return 100.0 * passed() / total();
}

const GroupSummary& AggregateReport::group(std::string_view text, std::string_view model) const {
  for (const auto& g : groups) {
    if (g.text == text && g.model == model) return g;
  }
  throw Error("no aggregate group " + std::string(text) + "/" +
              (model.empty() ? std::string("Aggregate") : std::string(model)));
}

const GapSummary& AggregateReport::gap(std::string_view text) const {
  for (const auto& g : gaps) {
    if (g.text == text) return g;
  }
  throw Error("no gap for text " + std::string(text));
}

std::vector<std::string> AggregateReport::texts() const {
  std::vector<std::string> out;
  for (const auto& g : groups) {
    if (g.is_aggregate()) out.push_back(g.text);
  }
  return out;
}

AggregateReport aggregate(std::span<const ScoredTranslation> translations, const Stratum& stratum,
                          std::string_view baseline_text) {
  std::vector<const ScoredTranslation*> kept;
  for (const auto& t : translations) {
    if (!stratum.excludes(t.key)) kept.push_back(&t);
  }
  if (kept.empty()) {
    throw Error("no translations left after filter '" + stratum.label() + "'");
  }
  std::sort(kept.begin(), kept.end(), [](auto* a, auto* b) { return a->key < b->key; });

  std::set<std::string> text_set;
  std::map<std::string, std::set<std::string>> models;
  for (const auto* t : kept) {
    text_set.insert(t->key.text);
    models[t->key.text].insert(t->key.model);
  }

  auto summarize = [&](const std::string& text, const std::string& model) {
    GroupSummary g;
    g.text = text;
    g.model = model;
    std::vector<double> scores;
    for (const auto* t : kept) {
      if (t->key.text != text || (!model.empty() && t->key.model != model)) continue;
      scores.push_back(t->tqs);
      g.severity += t->counts;
      g.scheme1.add(t->scheme1());
      g.scheme2.add(t->scheme2());
    }
    g.n = scores.size();
    g.mean_tqs = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(g.n);
    g.sd_defined = g.n >= 2;
    g.sd_tqs = sample_sd(scores, g.mean_tqs);
    return g;
  };

  AggregateReport report;
  report.stratum = stratum;
  report.baseline_text = std::string(baseline_text);
  for (const auto& text : ordered_texts(text_set, baseline_text)) {
    for (const auto& model : models[text]) report.groups.push_back(summarize(text, model));
    report.groups.push_back(summarize(text, ""));
  }

  if (text_set.count(report.baseline_text)) {
    const GroupSummary& base = report.group(report.baseline_text);
    for (const auto& text : report.texts()) {
      if (text == report.baseline_text) continue;
      const GroupSummary& g = report.group(text);
      report.gaps.push_back(GapSummary{text, g.mean_tqs - base.mean_tqs,
                                       base.scheme1.pass_rate() - g.scheme1.pass_rate(),
                                       base.scheme2.pass_rate() - g.scheme2.pass_rate()});
    }
  }
  return report;
}

std::vector<PassageQuality> passage_quality(std::span<const ScoredTranslation> translations) {
  std::map<std::pair<std::string, int>, PassageQuality> by_passage;
  for (const auto& t : translations) {
    auto& p = by_passage[{t.key.text, t.key.passage}];
    p.text = t.key.text;
    p.passage = t.key.passage;
    ++p.translations;
    p.mean_tqs += t.tqs;
    p.critical += t.counts.critical;
  }
  std::vector<PassageQuality> out;
  for (auto& [key, p] : by_passage) {
    p.mean_tqs /= static_cast<double>(p.translations);
    out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------- typology

double TextTypology::errors_per_translation() const {
  return translations == 0 ? 0.0 : static_cast<double>(total()) / static_cast<double>(translations);
}

const TextTypology* TypologyReport::find(std::string_view text) const {
  for (const auto& t : texts) {
    if (t.text == text) return &t;
  }
  return nullptr;
}

int TypologyReport::total_errors() const {
  int n = 0;
  for (const auto& t : texts) n += t.total();
  return n;
}

TypologyReport error_typology(std::span<const TranslationRecord> records,
                              std::string_view baseline_text) {
  std::map<std::string, TextTypology> by_text;
  for (const auto& r : records) {
    auto& t = by_text[r.key.text];
    t.text = r.key.text;
    t.has_types = true;
    ++t.translations;
    for (const auto& a : r.annotations) {
      t.severity.add(a.severity);
      ++t.types[a.error_type];
      ++t.subtypes[a.subtype];
    }
  }
  TypologyReport report;
  report.baseline_text = std::string(baseline_text);
  std::set<std::string> names;
  for (const auto& [name, t] : by_text) names.insert(name);
  for (const auto& name : ordered_texts(names, baseline_text)) {
    auto t = by_text[name];
    for (ErrorType e : kErrorTypes) t.types.try_emplace(e, 0);
    for (Subtype s : kSubtypes) t.subtypes.try_emplace(s, 0);
    report.texts.push_back(std::move(t));
  }
  return report;
}

TypologyReport severity_typology(std::span<const ScoredTranslation> translations,
                                 std::string_view baseline_text) {
  std::map<std::string, TextTypology> by_text;
  for (const auto& s : translations) {
    auto& t = by_text[s.key.text];
    t.text = s.key.text;
    ++t.translations;
    t.severity += s.counts;
  }
  TypologyReport report;
  report.baseline_text = std::string(baseline_text);
  std::set<std::string> names;
  for (const auto& [name, t] : by_text) names.insert(name);
  for (const auto& name : ordered_texts(names, baseline_text)) report.texts.push_back(by_text[name]);
  return report;
}

std::optional<double> share_ratio(int count, int total, int base_count, int base_total) {
  if (total <= 0 || base_total <= 0) return std::nullopt;
  const double share = percent_one_decimal(count, total);
  const double base = percent_one_decimal(base_count, base_total);
  if (base == 0.0) return std::nullopt;
  return share / base;
}

// ---------------------------------------------------------------- files

const std::vector<std::string> kAnnotationColumns{"text",     "passage",  "model",
                                                  "word_count", "error_type", "subtype",
                                                  "severity", "note"};

const std::vector<std::string> kSeverityColumns{"text",    "passage", "model", "tqs",
                                                "rating",  "neutral", "minor", "major",
                                                "critical"};

namespace {

TranslationKey read_key(const csv::Row& row) {
  TranslationKey key;
  key.text = row.required_text("text");
  const long long passage = row.integer("passage");
  if (passage < 1) row.fail("passage", "must be >= 1");
  key.passage = static_cast<int>(passage);
  key.model = row.required_text("model");
  return key;
}

}  // namespace

std::vector<TranslationRecord> read_annotations(const csv::Table& table) {
  if (!table.has_columns(kAnnotationColumns)) {
    throw Error(table.source + ": annotation file needs columns text,passage,model,word_count,"
                               "error_type,subtype,severity,note");
  }
  std::map<TranslationKey, TranslationRecord> records;
  std::map<TranslationKey, bool> saw_empty_row;
  for (const auto& rec : table.rows) {
    const csv::Row row(table, rec);
    const TranslationKey key = read_key(row);
    const long long wc = row.integer("word_count");
    if (wc <= 0) row.fail("word_count", "must be positive");

    auto [it, inserted] = records.try_emplace(key);
    TranslationRecord& r = it->second;
    if (inserted) {
      r.key = key;
      r.word_count = static_cast<int>(wc);
    } else if (r.word_count != wc) {
      row.fail("word_count", "disagrees with an earlier row for " + to_string(key));
    }

    const std::string type = unicode::trim(row.text("error_type"));
    const std::string subtype = unicode::trim(row.text("subtype"));
    const std::string severity = unicode::trim(row.text("severity"));
    if (type.empty() && subtype.empty() && severity.empty()) {
      if (!inserted || saw_empty_row[key]) {
        row.fail("an error-free row must be the only row for " + to_string(key));
      }
      saw_empty_row[key] = true;
      continue;
    }
    if (saw_empty_row[key]) {
      row.fail("error row after an error-free row for " + to_string(key));
    }
    try {
      r.annotations.push_back(ErrorAnnotation::make(parse_error_type(type), parse_subtype(subtype),
                                                    parse_severity(severity), row.text("note")));
    } catch (const Error& e) {
      row.fail(e.what());
    }
  }
  std::vector<TranslationRecord> out;
  for (auto& [key, r] : records) out.push_back(std::move(r));
  return out;
}

void write_annotations(std::ostream& out, std::span<const TranslationRecord> records) {
  csv::write_row(out, kAnnotationColumns);
  for (const auto& r : records) {
    const std::vector<std::string> head{r.key.text, std::to_string(r.key.passage), r.key.model,
                                        std::to_string(r.word_count)};
    if (r.annotations.empty()) {
      auto fields = head;
      fields.insert(fields.end(), {"", "", "", ""});
      csv::write_row(out, fields);
    }
    for (const auto& a : r.annotations) {
      auto fields = head;
      fields.insert(fields.end(), {std::string(to_string(a.error_type)),
                                   std::string(to_string(a.subtype)),
                                   std::string(to_string(a.severity)), a.note});
      csv::write_row(out, fields);
    }
  }
}

std::vector<ScoredTranslation> read_severity_fixture(const csv::Table& table) {
  if (!table.has_columns(kSeverityColumns)) {
    throw Error(table.source + ": severity fixture needs columns "
                               "text,passage,model,tqs,rating,neutral,minor,major,critical");
  }
  std::vector<ScoredTranslation> out;
  std::set<TranslationKey> seen;
  for (const auto& rec : table.rows) {
    const csv::Row row(table, rec);
    ScoredTranslation s;
    s.key = read_key(row);
    if (!seen.insert(s.key).second) row.fail("duplicate translation key " + to_string(s.key));
    s.tqs = row.real("tqs");
    if (s.tqs < 0.0 || s.tqs > 100.0) row.fail("tqs", "must lie in [0,100]");
    const std::string rating = unicode::trim(row.text("rating"));
    if (!rating.empty()) {
      try {
        s.stored_rating = parse_rating(rating);
      } catch (const Error& e) {
        row.fail("rating", e.what());
      }
    }
    auto count = [&](const char* column) {
      const long long n = row.integer(column);
      if (n < 0) row.fail(column, "must be >= 0");
      return static_cast<int>(n);
    };
    s.counts = SeverityCounts{count("neutral"), count("minor"), count("major"), count("critical")};
    if (auto wc = row.optional_integer("word_count")) {
      if (*wc <= 0) row.fail("word_count", "must be positive");
      s.word_count = static_cast<int>(*wc);
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_severity_fixture(std::ostream& out, std::span<const ScoredTranslation> translations) {
  auto header = kSeverityColumns;
  header.push_back("word_count");
  csv::write_row(out, header);
  for (const auto& s : translations) {
    csv::write_row(out, {s.key.text, std::to_string(s.key.passage), s.key.model,
                         format_exact(s.tqs),
                         s.stored_rating ? std::string(to_string(*s.stored_rating)) : "",
                         std::to_string(s.counts.neutral), std::to_string(s.counts.minor),
                         std::to_string(s.counts.major), std::to_string(s.counts.critical),
                         s.word_count ? std::to_string(*s.word_count) : ""});
  }
}

}  // namespace philoscope

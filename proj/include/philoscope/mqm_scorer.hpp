#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "philoscope/translation_key.hpp"

namespace philoscope {

namespace csv {
struct Table;
}

enum class ErrorType { Terminology, Accuracy };
enum class Subtype {
  TermAccuracy,
  TermConsistency,
  Mistranslation,
  Overtranslation,
  Undertranslation,
  Addition,
  Omission,
};
enum class Severity { Neutral, Minor, Major, Critical };
enum class Rating { HighPass, LowPass, Fail };

inline constexpr std::array kErrorTypes{ErrorType::Terminology, ErrorType::Accuracy};
inline constexpr std::array kSubtypes{Subtype::TermAccuracy,    Subtype::TermConsistency,
                                      Subtype::Mistranslation,  Subtype::Overtranslation,
                                      Subtype::Undertranslation, Subtype::Addition,
                                      Subtype::Omission};
inline constexpr std::array kSeverities{Severity::Neutral, Severity::Minor, Severity::Major,
                                        Severity::Critical};
inline constexpr std::array kRatings{Rating::HighPass, Rating::LowPass, Rating::Fail};

std::string_view to_string(ErrorType t);
std::string_view to_string(Subtype s);
std::string_view to_string(Severity s);
std::string_view to_string(Rating r);         // "HP", "LP", "F"
std::string_view display_name(Subtype s);     // "Term. Accuracy"
std::string_view display_name(Rating r);      // "High Pass"

ErrorType parse_error_type(std::string_view text);
Subtype parse_subtype(std::string_view text);
Severity parse_severity(std::string_view text);
Rating parse_rating(std::string_view text);

ErrorType error_type_of(Subtype subtype);

// Penalty multiplier per severity: 0 / 1 / 5 / 25.
int severity_weight(Severity severity);

struct ErrorAnnotation {
  ErrorType error_type = ErrorType::Accuracy;
  Subtype subtype = Subtype::Mistranslation;
  Severity severity = Severity::Minor;
  std::string note;

  // Rejects a subtype that belongs to the other error type.
  static ErrorAnnotation make(ErrorType type, Subtype subtype, Severity severity,
                              std::string note = {});

  friend bool operator==(const ErrorAnnotation&, const ErrorAnnotation&) = default;
};

struct SeverityCounts {
  int neutral = 0;
  int minor = 0;
  int major = 0;
  int critical = 0;

  int total() const { return neutral + minor + major + critical; }
  int get(Severity s) const;
  void add(Severity s, int n = 1);
  SeverityCounts& operator+=(const SeverityCounts& other);

  friend bool operator==(const SeverityCounts&, const SeverityCounts&) = default;
};

struct TranslationRecord {
  TranslationKey key;
  int word_count = 0;
  std::vector<ErrorAnnotation> annotations;

  SeverityCounts severity_counts() const;

  friend bool operator==(const TranslationRecord&, const TranslationRecord&) = default;
};

// 100 - 100 * (minor + 5 major + 25 critical) / word_count, clamped at 0.
double tqs(const SeverityCounts& counts, int word_count);

Rating rate_scheme1(double tqs);
Rating rate_scheme2(double tqs, int critical_count);

struct QualityResult {
  double tqs = 0.0;
  Rating rating_scheme1 = Rating::Fail;
  Rating rating_scheme2 = Rating::Fail;
  bool has_critical = false;
  SeverityCounts severity_counts;
};

QualityResult assess(const TranslationRecord& record);

// A translation with a TQS and its severity tally: either computed from
// annotations or read from a severity-count fixture (which carries the
// published rating but no word count).
struct ScoredTranslation {
  TranslationKey key;
  double tqs = 0.0;
  SeverityCounts counts;
  std::optional<Rating> stored_rating;
  std::optional<int> word_count;

  bool has_critical() const { return counts.critical > 0; }
  Rating scheme1() const { return rate_scheme1(tqs); }
  Rating scheme2() const { return rate_scheme2(tqs, counts.critical); }

  friend bool operator==(const ScoredTranslation&, const ScoredTranslation&) = default;
};

ScoredTranslation score(const TranslationRecord& record);

// ---------------------------------------------------------------- strata

// "Comp:8" drops a whole passage; "Comp:3:ChatGPT" drops one translation.
struct ExclusionRule {
  std::string text;
  int passage = 0;
  std::optional<std::string> model;

  bool matches(const TranslationKey& key) const;
  friend bool operator==(const ExclusionRule&, const ExclusionRule&) = default;
};

struct Stratum {
  std::vector<ExclusionRule> rules;

  bool empty() const { return rules.empty(); }
  bool excludes(const TranslationKey& key) const;
  // "all passages" or e.g. "excl. Comp 8, 10, ChatGPT on Comp 3"
  std::string label() const;
  std::string spec() const;  // round-trips through parse_stratum
};

Stratum parse_stratum(std::string_view spec);  // "Comp:8,Comp:10"

// ---------------------------------------------------------------- aggregation

struct RatingTally {
  int high_pass = 0;
  int low_pass = 0;
  int fail = 0;

  void add(Rating r);
  int count(Rating r) const;
  int total() const { return high_pass + low_pass + fail; }
  int passed() const { return high_pass + low_pass; }
  double pass_rate() const;  // percent, unrounded
};

struct GroupSummary {
  std::string text;
  std::string model;  // empty for the all-models aggregate
  std::size_t n = 0;
  double mean_tqs = 0.0;
  double sd_tqs = 0.0;  // sample SD (n-1); 0 with sd_defined == false when n == 1
  bool sd_defined = false;
  SeverityCounts severity;
  RatingTally scheme1;
  RatingTally scheme2;

  bool is_aggregate() const { return model.empty(); }
};

// Gaps of one text against the baseline text. The TQS gap is text minus
// baseline (negative when the text scores lower); pass-rate gaps are
// baseline minus text in percentage points.
struct GapSummary {
  std::string text;
  double tqs_gap = 0.0;
  double pass_gap_scheme1 = 0.0;
  double pass_gap_scheme2 = 0.0;
};

struct AggregateReport {
  Stratum stratum;
  std::string baseline_text;
  // Per text (baseline first, then alphabetical): each model alphabetically,
  // then the text aggregate.
  std::vector<GroupSummary> groups;
  std::vector<GapSummary> gaps;

  const GroupSummary& group(std::string_view text, std::string_view model = {}) const;
  const GapSummary& gap(std::string_view text) const;
  std::vector<std::string> texts() const;
};

AggregateReport aggregate(std::span<const ScoredTranslation> translations,
                          const Stratum& stratum = {}, std::string_view baseline_text = "Mix");

// Mean TQS over models and summed critical errors, per passage.
struct PassageQuality {
  std::string text;
  int passage = 0;
  std::size_t translations = 0;
  double mean_tqs = 0.0;
  int critical = 0;
};

std::vector<PassageQuality> passage_quality(std::span<const ScoredTranslation> translations);

// ---------------------------------------------------------------- typology

struct TextTypology {
  std::string text;
  std::size_t translations = 0;
  SeverityCounts severity;
  bool has_types = false;  // false when built from severity counts only
  std::map<ErrorType, int> types;
  std::map<Subtype, int> subtypes;

  int total() const { return severity.total(); }
  double errors_per_translation() const;
};

struct TypologyReport {
  std::string baseline_text;
  std::vector<TextTypology> texts;  // baseline first, then alphabetical

  const TextTypology* find(std::string_view text) const;
  int total_errors() const;
};

TypologyReport error_typology(std::span<const TranslationRecord> records,
                              std::string_view baseline_text = "Mix");
TypologyReport severity_typology(std::span<const ScoredTranslation> translations,
                                 std::string_view baseline_text = "Mix");

// Ratio of two within-text percentages as displayed: each share is rounded
// to one decimal first, then divided. nullopt when the base share is 0.
std::optional<double> share_ratio(int count, int total, int base_count, int base_total);

// ---------------------------------------------------------------- files

// Annotation CSV: text,passage,model,word_count,error_type,subtype,severity,note.
// One row per error; an error-free translation is one row with empty error
// columns.
extern const std::vector<std::string> kAnnotationColumns;
std::vector<TranslationRecord> read_annotations(const csv::Table& table);
void write_annotations(std::ostream& out, std::span<const TranslationRecord> records);

// Severity-count fixture: text,passage,model,tqs,rating,neutral,minor,major,critical
// with an optional word_count column.
extern const std::vector<std::string> kSeverityColumns;
std::vector<ScoredTranslation> read_severity_fixture(const csv::Table& table);
void write_severity_fixture(std::ostream& out, std::span<const ScoredTranslation> translations);

}  // namespace philoscope

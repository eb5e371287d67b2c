#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "philoscope/translation_key.hpp"

namespace philoscope {

namespace csv {
struct Table;
}

// A tokenized, normalized passage. Text is NFC-normalized and lowercased;
// tokens split on Unicode whitespace with each leading or trailing
// punctuation character peeled off as its own token. `chars` is the same
// text with all whitespace removed.
struct Segment {
  std::vector<std::string> tokens;
  std::u32string chars;

  static Segment from_text(std::string_view text);
  bool empty() const { return tokens.empty(); }
};

std::vector<std::string> tokenize(std::string_view text);

enum class BleuSmoothing {
  None,    // any zero n-gram precision makes the score 0
  AddOne,  // (m + 1) / (t + 1) for n >= 2; unigram precision unsmoothed
};

std::string_view to_string(BleuSmoothing s);  // "none", "add1"
BleuSmoothing parse_smoothing(std::string_view text);

struct BleuStats {
  std::size_t hyp_length = 0;
  std::size_t ref_length = 0;  // closest reference length, ties to the shorter
  std::vector<std::size_t> matches;  // clipped, per order 1..4
  std::vector<std::size_t> totals;
};

BleuStats bleu_stats(const Segment& hypothesis, std::span<const Segment> references,
                     int max_order = 4);
double bleu4(const Segment& hypothesis, std::span<const Segment> references,
             BleuSmoothing smoothing = BleuSmoothing::None);

struct ChrfConfig {
  int char_order = 6;
  int word_order = 2;
  double beta = 2.0;
};

double chrf_pp(const Segment& hypothesis, const Segment& reference, const ChrfConfig& config = {});
double chrf_pp(const Segment& hypothesis, std::span<const Segment> references,
               const ChrfConfig& config = {});

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

struct RougeL {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

RougeL rouge_l_single(const Segment& hypothesis, const Segment& reference);
double rouge_l(const Segment& hypothesis, std::span<const Segment> references);

// Highest-scoring reference; ties go to the lexicographically smallest id.
std::pair<std::string, double> best_reference(const std::map<std::string, double>& scores);

// ---------------------------------------------------------------- scores

enum class Metric { BLEU4, CHRFpp, ROUGE_L, METEOR, BERTScore, COMET, BLEURT };

inline constexpr Metric kMetrics[] = {Metric::BLEU4,     Metric::CHRFpp, Metric::METEOR,
                                      Metric::ROUGE_L,   Metric::BERTScore, Metric::COMET,
                                      Metric::BLEURT};

std::string_view to_string(Metric m);  // "BLEU-4", "chrF++", ...
Metric parse_metric(std::string_view text);
std::optional<Metric> try_parse_metric(std::string_view text);
bool is_native(Metric m);

enum class Provenance { Native, Ingested };

std::string_view to_string(Provenance p);
Provenance parse_provenance(std::string_view text);

struct MetricScore {
  Metric metric = Metric::BLEU4;
  double value = 0.0;
  std::optional<std::string> reference_id;  // unset for the multi-reference score
  Provenance provenance = Provenance::Ingested;

  // Native scores must be a lexical metric with value in [0,1]; ingested
  // scores only need to be finite (neural metrics are not bounded).
  static MetricScore make(Metric metric, double value, std::optional<std::string> reference_id,
                          Provenance provenance);

  friend bool operator==(const MetricScore&, const MetricScore&) = default;
};

struct KeyedMetricScore {
  TranslationKey key;
  MetricScore score;

  friend bool operator==(const KeyedMetricScore&, const KeyedMetricScore&) = default;
};

bool operator<(const KeyedMetricScore& a, const KeyedMetricScore& b);

// For every (translation, metric) with per-reference scores, the winning
// reference; returns wins per metric per reference id.
std::map<Metric, std::map<std::string, int>> reference_preferences(
    std::span<const KeyedMetricScore> scores);

// Long metric schema: text,passage,model,metric,reference_id,value[,provenance].
extern const std::vector<std::string> kMetricColumns;
std::vector<KeyedMetricScore> read_metric_scores(const csv::Table& table);
void write_metric_scores(std::ostream& out, std::span<const KeyedMetricScore> scores,
                         std::span<const std::string> comments = {});

// Pairs file: text,passage,model,hypothesis_path,reference_paths with
// reference paths separated by ';' and resolved against the CSV's directory.
// The reference id is the file stem. Emits per-reference and
// multi-reference scores for each native metric.
std::vector<KeyedMetricScore> score_pair_file(const std::filesystem::path& pairs,
                                              BleuSmoothing smoothing, unsigned threads = 1);

}  // namespace philoscope

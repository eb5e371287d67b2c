#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "philoscope/corpus_index.hpp"

namespace philoscope {

struct PassageLemmas {
  std::string text_id;
  std::string passage_id;
  std::vector<std::string> lemmas;  // one per token, duplicates kept
};

enum class Risk { Low, Elevated, Critical };

std::string_view to_string(Risk risk);
Risk parse_risk(std::string_view text);

// Low below `elevated_from`, Critical above `critical_above`, Elevated in
// the closed band between them.
struct RiskBands {
  double elevated_from = 0.20;
  double critical_above = 0.30;

  void validate() const;
};

RiskBands parse_risk_bands(std::string_view text);  // "0.20,0.30"

Risk risk_flag(double rare_ratio, const RiskBands& bands = {});

enum class CountingMode {
  Token,        // every occurrence counts
  UniqueLemma,  // each distinct lemma counts once (sensitivity analysis)
};

struct ProfileOptions {
  std::uint64_t rare_threshold = 50;  // frequency < threshold is rare
  RiskBands bands;
  CountingMode mode = CountingMode::Token;
};

struct PassageProfile {
  std::string text_id;
  std::string passage_id;
  std::uint64_t term_count = 0;
  double avg_zipf = 0.0;
  std::uint64_t rare_count = 0;
  double rare_ratio = 0.0;
  std::uint64_t not_found_count = 0;
  double nf_ratio = 0.0;
  Risk risk = Risk::Low;

  friend bool operator==(const PassageProfile&, const PassageProfile&) = default;
};

PassageProfile profile(const PassageLemmas& passage, const FrequencyIndex& index,
                       const ProfileOptions& options = {});

// Builds a profile from published counts, recomputing both ratios from the
// counts and the risk from the rare ratio.
PassageProfile profile_from_counts(std::string text_id, std::string passage_id,
                                   std::uint64_t term_count, double avg_zipf,
                                   std::uint64_t rare_count, std::uint64_t not_found_count,
                                   const RiskBands& bands = {});

// {"text_id": "...", "passage_id": "...", "lemmas": ["...", ...]} per line.
std::vector<PassageLemmas> read_passages_jsonl(std::istream& in, const std::string& source);

// Columns in rarity-table order, plus the risk flag:
// text,passage,terms,avg_zipf,rare_ratio,rare,not_found,nf_ratio,risk
void write_profiles_csv(std::ostream& out, std::span<const PassageProfile> profiles);

}  // namespace philoscope

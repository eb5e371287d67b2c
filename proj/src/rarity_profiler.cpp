#include "philoscope/rarity_profiler.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <set>

#include <json.hpp>

#include "philoscope/csv.hpp"
#include "philoscope/error.hpp"
#include "philoscope/numeric_format.hpp"
#include "philoscope/unicode.hpp"

namespace philoscope {

std::string_view to_string(Risk risk) {
  switch (risk) {
    case Risk::Low: return "Low";
    case Risk::Elevated: return "Elevated";
    case Risk::Critical: return "Critical";
  }
  return "?";
}

Risk parse_risk(std::string_view text) {
  if (text == "Low") return Risk::Low;
  if (text == "Elevated") return Risk::Elevated;
  if (text == "Critical") return Risk::Critical;
  throw Error("unknown risk level '" + std::string(text) + "'");
}

void RiskBands::validate() const {
  if (!(0.0 <= elevated_from && elevated_from <= critical_above && critical_above <= 1.0)) {
    throw Error("risk bands must satisfy 0 <= elevated <= critical <= 1");
  }
}

RiskBands parse_risk_bands(std::string_view text) {
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) throw Error("risk bands: expected 'low,high'");
  RiskBands bands;
  try {
    bands.elevated_from = std::stod(std::string(text.substr(0, comma)));
    bands.critical_above = std::stod(std::string(text.substr(comma + 1)));
  } catch (const std::exception&) {
    throw Error("risk bands: not numbers: '" + std::string(text) + "'");
  }
  bands.validate();
  return bands;
}

Risk risk_flag(double rare_ratio, const RiskBands& bands) {
  if (!(rare_ratio >= 0.0 && rare_ratio <= 1.0)) {
    throw Error("risk_flag: rare ratio out of [0,1]: " + format_exact(rare_ratio));
  }
  if (rare_ratio < bands.elevated_from) return Risk::Low;
  if (rare_ratio > bands.critical_above) return Risk::Critical;
  return Risk::Elevated;
}

PassageProfile profile(const PassageLemmas& passage, const FrequencyIndex& index,
                       const ProfileOptions& options) {
  if (passage.lemmas.empty()) {
    throw Error("profile: passage " + passage.text_id + ":" + passage.passage_id + " has no lemmas");
  }
  options.bands.validate();

  std::vector<std::string> lemmas;
  lemmas.reserve(passage.lemmas.size());
  for (const auto& l : passage.lemmas) lemmas.push_back(unicode::nfc(l));
  if (options.mode == CountingMode::UniqueLemma) {
    std::set<std::string> unique(lemmas.begin(), lemmas.end());
    lemmas.assign(unique.begin(), unique.end());
  }

  PassageProfile p;
  p.text_id = passage.text_id;
  p.passage_id = passage.passage_id;
  p.term_count = lemmas.size();
  double zipf_sum = 0.0;
  for (const auto& lemma : lemmas) {
    const std::uint64_t count = index.frequency_normalized(lemma);
    zipf_sum += zipf_scale(count, index.total_tokens());
    if (count == 0) ++p.not_found_count;
    if (count < options.rare_threshold || count == 0) ++p.rare_count;
  }
  p.avg_zipf = zipf_sum / static_cast<double>(p.term_count);
  p.rare_ratio = static_cast<double>(p.rare_count) / static_cast<double>(p.term_count);
  p.nf_ratio = static_cast<double>(p.not_found_count) / static_cast<double>(p.term_count);
  p.risk = risk_flag(p.rare_ratio, options.bands);
  return p;
}

PassageProfile profile_from_counts(std::string text_id, std::string passage_id,
                                   std::uint64_t term_count, double avg_zipf,
                                   std::uint64_t rare_count, std::uint64_t not_found_count,
                                   const RiskBands& bands) {
  if (term_count == 0) throw Error("profile " + text_id + ":" + passage_id + ": zero terms");
  if (rare_count > term_count || not_found_count > rare_count) {
    throw Error("profile " + text_id + ":" + passage_id +
                ": need not_found <= rare <= terms");
  }
  PassageProfile p;
  p.text_id = std::move(text_id);
  p.passage_id = std::move(passage_id);
  p.term_count = term_count;
  p.avg_zipf = avg_zipf;
  p.rare_count = rare_count;
  p.not_found_count = not_found_count;
  p.rare_ratio = static_cast<double>(rare_count) / static_cast<double>(term_count);
  p.nf_ratio = static_cast<double>(not_found_count) / static_cast<double>(term_count);
  p.risk = risk_flag(p.rare_ratio, bands);
  return p;
}

std::vector<PassageLemmas> read_passages_jsonl(std::istream& in, const std::string& source) {
  using json = nlohmann::json;
  std::vector<PassageLemmas> passages;
  std::set<std::pair<std::string, std::string>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string at = source + ":" + std::to_string(line_no);
    if (unicode::trim(line).empty()) continue;
    unicode::require_utf8(line, at);
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(at + ": malformed JSON: " + e.what());
    }
    auto string_field = [&](const char* key) {
      if (!record.is_object() || !record.contains(key)) {
        throw Error(at + ": missing \"" + key + "\"");
      }
      const auto& v = record[key];
      if (v.is_string()) return v.get<std::string>();
      if (v.is_number_integer()) return std::to_string(v.get<long long>());
      throw Error(at + ": \"" + key + "\" must be a string");
    };
    PassageLemmas p;
    p.text_id = string_field("text_id");
    p.passage_id = string_field("passage_id");
    if (!record.contains("lemmas") || !record["lemmas"].is_array()) {
      throw Error(at + ": missing \"lemmas\" array");
    }
    for (const auto& l : record["lemmas"]) {
      if (!l.is_string()) throw Error(at + ": lemmas must be strings");
      std::string lemma = unicode::nfc(unicode::trim(l.get<std::string>()));
      if (lemma.empty()) throw Error(at + ": empty lemma");
      p.lemmas.push_back(std::move(lemma));
    }
    if (p.lemmas.empty()) throw Error(at + ": passage has no lemmas");
    if (!seen.emplace(p.text_id, p.passage_id).second) {
      throw Error(at + ": duplicate passage " + p.text_id + ":" + p.passage_id);
    }
    passages.push_back(std::move(p));
  }
  return passages;
}

void write_profiles_csv(std::ostream& out, std::span<const PassageProfile> profiles) {
  csv::write_row(out, {"text", "passage", "terms", "avg_zipf", "rare_ratio", "rare", "not_found",
                       "nf_ratio", "risk"});
  for (const auto& p : profiles) {
    csv::write_row(out, {p.text_id, p.passage_id, std::to_string(p.term_count),
                         format_fixed(p.avg_zipf, 4), format_fixed(p.rare_ratio, 4),
                         std::to_string(p.rare_count), std::to_string(p.not_found_count),
                         format_fixed(p.nf_ratio, 4), std::string(to_string(p.risk))});
  }
}

}  // namespace philoscope

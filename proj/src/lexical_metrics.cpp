#include "philoscope/lexical_metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <ostream>
#include <set>
#include <tuple>
#include <sstream>
#include <unordered_map>

#include "philoscope/csv.hpp"
#include "philoscope/error.hpp"
#include "philoscope/numeric_format.hpp"
#include "philoscope/unicode.hpp"

namespace philoscope {
namespace {

std::string fold(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

std::u32string normalized_code_points(std::string_view text) {
  unicode::require_utf8(text, "segment");
  return unicode::to_code_points(unicode::nfc(unicode::to_lower(unicode::nfc(text))));
}

template <class Key>
using Counts = std::unordered_map<Key, std::size_t>;

Counts<std::string> word_ngrams(const std::vector<std::string>& tokens, int n) {
  Counts<std::string> out;
  const auto len = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + len <= tokens.size(); ++i) {
    std::string gram = tokens[i];
    for (std::size_t j = 1; j < len; ++j) gram += ' ' + tokens[i + j];
    ++out[gram];
  }
  return out;
}

Counts<std::u32string> char_ngrams(const std::u32string& chars, int n) {
  Counts<std::u32string> out;
  const auto len = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + len <= chars.size(); ++i) ++out[chars.substr(i, len)];
  return out;
}

struct OrderStats {
  std::size_t hyp = 0;
  std::size_t ref = 0;
  std::size_t match = 0;
};

template <class Key>
OrderStats overlap(const Counts<Key>& hyp, const Counts<Key>& ref) {
  OrderStats s;
  for (const auto& [g, c] : hyp) {
    s.hyp += c;
    if (auto it = ref.find(g); it != ref.end()) s.match += std::min(c, it->second);
  }
  for (const auto& [g, c] : ref) s.ref += c;
  return s;
}

void require_segments(const Segment& hypothesis, std::span<const Segment> references,
                      std::string_view metric) {
  if (hypothesis.empty()) throw Error(std::string(metric) + ": empty hypothesis");
  if (references.empty()) throw Error(std::string(metric) + ": no references");
  for (const auto& r : references) {
    if (r.empty()) throw Error(std::string(metric) + ": empty reference");
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  if (text.starts_with("\xEF\xBB\xBF")) text.erase(0, 3);
  if (auto bad = unicode::find_invalid_utf8(text)) {
    throw Error(path.string() + ": invalid UTF-8 at byte " + std::to_string(*bad));
  }
  return text;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  const std::u32string cps = normalized_code_points(text);
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < cps.size()) {
    if (unicode::is_whitespace(cps[i])) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < cps.size() && !unicode::is_whitespace(cps[end])) ++end;
    std::size_t lo = i;
    std::size_t hi = end;
    while (lo < hi && unicode::is_punctuation(cps[lo])) {
      tokens.push_back(unicode::to_utf8(std::u32string_view(cps).substr(lo, 1)));
      ++lo;
    }
    std::vector<std::string> trailing;
    while (hi > lo && unicode::is_punctuation(cps[hi - 1])) {
      trailing.push_back(unicode::to_utf8(std::u32string_view(cps).substr(hi - 1, 1)));
      --hi;
    }
    if (hi > lo) tokens.push_back(unicode::to_utf8(std::u32string_view(cps).substr(lo, hi - lo)));
    tokens.insert(tokens.end(), trailing.rbegin(), trailing.rend());
    i = end;
  }
  return tokens;
}

Segment Segment::from_text(std::string_view text) {
  Segment s;
  s.tokens = tokenize(text);
  for (char32_t c : normalized_code_points(text)) {
    if (!unicode::is_whitespace(c)) s.chars.push_back(c);
  }
  return s;
}

std::string_view to_string(BleuSmoothing s) {
  return s == BleuSmoothing::None ? "none" : "add1";
}

BleuSmoothing parse_smoothing(std::string_view text) {
  const std::string f = fold(text);
  if (f == "none") return BleuSmoothing::None;
  if (f == "add1" || f == "addone") return BleuSmoothing::AddOne;
  throw Error("unknown smoothing '" + std::string(text) + "' (expected none or add1)");
}

// ---------------------------------------------------------------- BLEU

BleuStats bleu_stats(const Segment& hypothesis, std::span<const Segment> references,
                     int max_order) {
  require_segments(hypothesis, references, "BLEU");
  BleuStats stats;
  stats.hyp_length = hypothesis.tokens.size();

  std::size_t best_diff = std::numeric_limits<std::size_t>::max();
  for (const auto& r : references) {
    const std::size_t len = r.tokens.size();
    const std::size_t diff = len > stats.hyp_length ? len - stats.hyp_length : stats.hyp_length - len;
    if (diff < best_diff || (diff == best_diff && len < stats.ref_length)) {
      best_diff = diff;
      stats.ref_length = len;
    }
  }

  for (int n = 1; n <= max_order; ++n) {
    const auto hyp = word_ngrams(hypothesis.tokens, n);
    Counts<std::string> max_ref;
    for (const auto& r : references) {
      for (const auto& [g, c] : word_ngrams(r.tokens, n)) {
        auto& slot = max_ref[g];
        slot = std::max(slot, c);
      }
    }
    const OrderStats s = overlap(hyp, max_ref);
    stats.matches.push_back(s.match);
    stats.totals.push_back(s.hyp);
  }
  return stats;
}

double bleu4(const Segment& hypothesis, std::span<const Segment> references,
             BleuSmoothing smoothing) {
  const BleuStats s = bleu_stats(hypothesis, references, 4);
  double log_sum = 0.0;
  for (std::size_t i = 0; i < s.matches.size(); ++i) {
    double m = static_cast<double>(s.matches[i]);
    double t = static_cast<double>(s.totals[i]);
    if (smoothing == BleuSmoothing::AddOne && i > 0) {
      m += 1.0;
      t += 1.0;
    }
    if (m == 0.0 || t == 0.0) return 0.0;
    log_sum += std::log(m / t);
  }
  const double c = static_cast<double>(s.hyp_length);
  const double r = static_cast<double>(s.ref_length);
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return std::clamp(bp * std::exp(log_sum / static_cast<double>(s.matches.size())), 0.0, 1.0);
}

// ---------------------------------------------------------------- chrF++

double chrf_pp(const Segment& hypothesis, const Segment& reference, const ChrfConfig& config) {
  require_segments(hypothesis, std::span(&reference, 1), "chrF++");
  std::vector<OrderStats> orders;
  for (int n = 1; n <= config.char_order; ++n) {
    orders.push_back(overlap(char_ngrams(hypothesis.chars, n), char_ngrams(reference.chars, n)));
  }
  for (int n = 1; n <= config.word_order; ++n) {
    orders.push_back(overlap(word_ngrams(hypothesis.tokens, n), word_ngrams(reference.tokens, n)));
  }
  // Precision and recall are averaged over orders where both sides have
  // n-grams, then combined into a single F-beta.
  double precision = 0.0;
  double recall = 0.0;
  int effective = 0;
  for (const auto& o : orders) {
    if (o.hyp == 0 || o.ref == 0) continue;
    precision += static_cast<double>(o.match) / static_cast<double>(o.hyp);
    recall += static_cast<double>(o.match) / static_cast<double>(o.ref);
    ++effective;
  }
  if (effective == 0) return 0.0;
  precision /= effective;
  recall /= effective;
  if (precision + recall == 0.0) return 0.0;
  const double b2 = config.beta * config.beta;
  return std::clamp((1.0 + b2) * precision * recall / (b2 * precision + recall), 0.0, 1.0);
}

double chrf_pp(const Segment& hypothesis, std::span<const Segment> references,
               const ChrfConfig& config) {
  require_segments(hypothesis, references, "chrF++");
  double best = 0.0;
  for (const auto& r : references) best = std::max(best, chrf_pp(hypothesis, r, config));
  return best;
}

// ---------------------------------------------------------------- ROUGE-L

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (const auto& x : a) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = x == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

RougeL rouge_l_single(const Segment& hypothesis, const Segment& reference) {
  require_segments(hypothesis, std::span(&reference, 1), "ROUGE-L");
  const auto lcs = static_cast<double>(lcs_length(hypothesis.tokens, reference.tokens));
  RougeL out;
  if (lcs == 0.0) return out;
  out.precision = lcs / static_cast<double>(hypothesis.tokens.size());
  out.recall = lcs / static_cast<double>(reference.tokens.size());
  out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

double rouge_l(const Segment& hypothesis, std::span<const Segment> references) {
  require_segments(hypothesis, references, "ROUGE-L");
  double best = 0.0;
  for (const auto& r : references) best = std::max(best, rouge_l_single(hypothesis, r).f1);
  return best;
}

std::pair<std::string, double> best_reference(const std::map<std::string, double>& scores) {
  if (scores.empty()) throw Error("best_reference: no scores");
  auto best = scores.begin();
  for (auto it = std::next(best); it != scores.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return *best;
}

// ---------------------------------------------------------------- scores

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::BLEU4: return "BLEU-4";
    case Metric::CHRFpp: return "chrF++";
    case Metric::ROUGE_L: return "ROUGE-L";
    case Metric::METEOR: return "METEOR";
    case Metric::BERTScore: return "BERTScore";
    case Metric::COMET: return "COMET";
    case Metric::BLEURT: return "BLEURT";
  }
  return "?";
}

std::optional<Metric> try_parse_metric(std::string_view text) {
  const std::string f = fold(text);
  if (f == "bleu4" || f == "bleu") return Metric::BLEU4;
  if (f == "chrf" || f == "chrfpp") return Metric::CHRFpp;
  if (f == "rougel" || f == "rouge") return Metric::ROUGE_L;
  if (f == "meteor") return Metric::METEOR;
  if (f == "bertscore" || f == "bert") return Metric::BERTScore;
  if (f == "comet") return Metric::COMET;
  if (f == "bleurt") return Metric::BLEURT;
  return std::nullopt;
}

Metric parse_metric(std::string_view text) {
  if (auto m = try_parse_metric(text)) return *m;
  throw Error("unknown metric '" + std::string(text) + "'");
}

bool is_native(Metric m) {
  return m == Metric::BLEU4 || m == Metric::CHRFpp || m == Metric::ROUGE_L;
}

std::string_view to_string(Provenance p) {
  return p == Provenance::Native ? "native" : "ingested";
}

Provenance parse_provenance(std::string_view text) {
  const std::string f = fold(text);
  if (f == "native") return Provenance::Native;
  if (f == "ingested" || f.empty()) return Provenance::Ingested;
  throw Error("unknown provenance '" + std::string(text) + "'");
}

MetricScore MetricScore::make(Metric metric, double value, std::optional<std::string> reference_id,
                              Provenance provenance) {
  if (!std::isfinite(value)) {
    throw Error(std::string(to_string(metric)) + ": non-finite score");
  }
  if (provenance == Provenance::Native) {
    if (!is_native(metric)) {
      throw Error(std::string(to_string(metric)) + " has no native implementation");
    }
    if (value < 0.0 || value > 1.0) {
      throw Error(std::string(to_string(metric)) + ": native score outside [0,1]");
    }
  }
  if (reference_id && reference_id->empty()) reference_id.reset();
  return MetricScore{metric, value, std::move(reference_id), provenance};
}

bool operator<(const KeyedMetricScore& a, const KeyedMetricScore& b) {
  return std::tie(a.key, a.score.metric, a.score.reference_id) <
         std::tie(b.key, b.score.metric, b.score.reference_id);
}

std::map<Metric, std::map<std::string, int>> reference_preferences(
    std::span<const KeyedMetricScore> scores) {
  std::map<std::pair<TranslationKey, Metric>, std::map<std::string, double>> per_ref;
  for (const auto& s : scores) {
    if (s.score.reference_id) per_ref[{s.key, s.score.metric}][*s.score.reference_id] = s.score.value;
  }
  std::map<Metric, std::map<std::string, int>> wins;
  for (const auto& [key, refs] : per_ref) {
    auto& tally = wins[key.second];
    for (const auto& [id, v] : refs) tally.try_emplace(id, 0);
    ++tally[best_reference(refs).first];
  }
  return wins;
}

const std::vector<std::string> kMetricColumns{"text",         "passage", "model",
                                              "metric",       "reference_id", "value"};

std::vector<KeyedMetricScore> read_metric_scores(const csv::Table& table) {
  if (!table.has_columns(kMetricColumns)) {
    throw Error(table.source + ": metric file needs columns "
                               "text,passage,model,metric,reference_id,value");
  }
  std::vector<KeyedMetricScore> out;
  for (const auto& rec : table.rows) {
    const csv::Row row(table, rec);
    KeyedMetricScore k;
    k.key.text = row.required_text("text");
    const long long passage = row.integer("passage");
    if (passage < 1) row.fail("passage", "must be >= 1");
    k.key.passage = static_cast<int>(passage);
    k.key.model = row.required_text("model");
    try {
      const Metric metric = parse_metric(row.required_text("metric"));
      const Provenance prov =
          row.has("provenance") ? parse_provenance(row.text("provenance")) : Provenance::Ingested;
      std::optional<std::string> ref;
      if (auto id = unicode::trim(row.text("reference_id")); !id.empty()) ref = id;
      k.score = MetricScore::make(metric, row.real("value"), std::move(ref), prov);
    } catch (const Error& e) {
      const std::string what = e.what();
      // csv::Row errors already carry the location.
      if (what.starts_with(table.source + ":")) throw;
      row.fail(what);
    }
    out.push_back(std::move(k));
  }
  return out;
}

void write_metric_scores(std::ostream& out, std::span<const KeyedMetricScore> scores,
                         std::span<const std::string> comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  auto header = kMetricColumns;
  header.push_back("provenance");
  csv::write_row(out, header);
  for (const auto& s : scores) {
    csv::write_row(out, {s.key.text, std::to_string(s.key.passage), s.key.model,
                         std::string(to_string(s.score.metric)), s.score.reference_id.value_or(""),
                         format_exact(s.score.value), std::string(to_string(s.score.provenance))});
  }
}

namespace {

struct PairJob {
  TranslationKey key;
  std::filesystem::path hypothesis;
  std::vector<std::filesystem::path> references;
};

std::vector<KeyedMetricScore> score_job(const PairJob& job, BleuSmoothing smoothing) {
  const Segment hyp = Segment::from_text(read_text_file(job.hypothesis));
  if (hyp.empty()) throw Error(job.hypothesis.string() + ": empty hypothesis");
  std::vector<Segment> refs;
  std::vector<std::string> ids;
  for (const auto& p : job.references) {
    refs.push_back(Segment::from_text(read_text_file(p)));
    if (refs.back().empty()) throw Error(p.string() + ": empty reference");
    ids.push_back(p.stem().string());
  }

  std::vector<KeyedMetricScore> out;
  auto emit = [&](Metric m, double v, std::optional<std::string> id) {
    out.push_back({job.key, MetricScore::make(m, v, std::move(id), Provenance::Native)});
  };
  emit(Metric::BLEU4, bleu4(hyp, refs, smoothing), std::nullopt);
  emit(Metric::CHRFpp, chrf_pp(hyp, refs), std::nullopt);
  emit(Metric::ROUGE_L, rouge_l(hyp, refs), std::nullopt);
  if (refs.size() > 1) {
    for (std::size_t i = 0; i < refs.size(); ++i) {
      const std::span one(&refs[i], 1);
      emit(Metric::BLEU4, bleu4(hyp, one, smoothing), ids[i]);
      emit(Metric::CHRFpp, chrf_pp(hyp, refs[i]), ids[i]);
      emit(Metric::ROUGE_L, rouge_l_single(hyp, refs[i]).f1, ids[i]);
    }
  }
  return out;
}

}  // namespace

std::vector<KeyedMetricScore> score_pair_file(const std::filesystem::path& pairs,
                                              BleuSmoothing smoothing, unsigned threads) {
  const csv::Table table = csv::read_file(pairs);
  const std::vector<std::string> columns{"text", "passage", "model", "hypothesis_path",
                                         "reference_paths"};
  if (!table.has_columns(columns)) {
    throw Error(table.source +
                ": pairs file needs columns text,passage,model,hypothesis_path,reference_paths");
  }
  const auto base = pairs.parent_path();
  std::vector<PairJob> jobs;
  std::set<TranslationKey> seen;
  for (const auto& rec : table.rows) {
    const csv::Row row(table, rec);
    PairJob job;
    job.key.text = row.required_text("text");
    const long long passage = row.integer("passage");
    if (passage < 1) row.fail("passage", "must be >= 1");
    job.key.passage = static_cast<int>(passage);
    job.key.model = row.required_text("model");
    if (!seen.insert(job.key).second) row.fail("duplicate translation key " + to_string(job.key));
    job.hypothesis = base / row.required_text("hypothesis_path");
    std::stringstream refs(row.required_text("reference_paths"));
    std::set<std::string> stems;
    for (std::string item; std::getline(refs, item, ';');) {
      item = unicode::trim(item);
      if (item.empty()) continue;
      std::filesystem::path p = base / item;
      if (!stems.insert(p.stem().string()).second) {
        row.fail("reference_paths", "two references share the id '" + p.stem().string() + "'");
      }
      job.references.push_back(std::move(p));
    }
    if (job.references.empty()) row.fail("reference_paths", "no reference files");
    jobs.push_back(std::move(job));
  }

  std::vector<std::vector<KeyedMetricScore>> results(jobs.size());
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(jobs.size(), 1));
  std::vector<std::future<void>> running;
  for (std::size_t w = 0; w < workers; ++w) {
    running.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < jobs.size(); i += workers) results[i] = score_job(jobs[i], smoothing);
    }));
  }
  for (auto& f : running) f.get();

  std::vector<KeyedMetricScore> out;
  for (auto& r : results) out.insert(out.end(), r.begin(), r.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace philoscope

#include "philoscope/corpus_index.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <future>
#include <istream>
#include <ostream>
#include <set>

#include <json.hpp>

#include "philoscope/error.hpp"
#include "philoscope/unicode.hpp"

namespace philoscope {
namespace {

using json = nlohmann::json;

constexpr double kPerBillion = 1e9;

std::string where(const std::string& source, std::size_t line, std::string_view doc_id) {
  std::string out = source + ":" + std::to_string(line);
  if (!doc_id.empty()) out += ": doc_id '" + std::string(doc_id) + "'";
  return out;
}

CorpusToken make_token(std::string_view surface, std::string_view lemma,
                       const std::string& source, std::size_t line, std::string_view doc_id) {
  const std::string context = where(source, line, doc_id);
  unicode::require_utf8(surface, context);
  unicode::require_utf8(lemma, context);
  CorpusToken token{unicode::nfc(surface), unicode::nfc(unicode::trim(lemma))};
  if (token.lemma.empty()) throw Error(context + ": empty lemma");
  if (token.lemma.find('\t') != std::string::npos || token.lemma.find('\n') != std::string::npos) {
    throw Error(context + ": lemma contains a tab or newline");
  }
  return token;
}

void check_unique_ids(const LemmaStream& stream, const std::string& source) {
  std::set<std::string_view> seen;
  for (const auto& doc : stream.documents) {
    if (!seen.insert(doc.doc_id).second) {
      throw Error(source + ": duplicate doc_id '" + doc.doc_id + "'");
    }
  }
}

void count_into(FrequencyIndex::Counts& counts, const CorpusDocument& doc) {
  for (const auto& token : doc.tokens) {
    auto it = counts.find(token.lemma);
    if (it == counts.end()) {
      counts.emplace(token.lemma, 1);
    } else {
      ++it->second;
    }
  }
}

}  // namespace

std::size_t LemmaStream::token_count() const {
  std::size_t n = 0;
  for (const auto& doc : documents) n += doc.tokens.size();
  return n;
}

LemmaStream read_lemma_stream_jsonl(std::istream& in, const std::string& source) {
  LemmaStream stream;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (unicode::trim(line).empty()) continue;
    unicode::require_utf8(line, where(source, line_no, {}));
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(where(source, line_no, {}) + ": malformed JSON: " + e.what());
    }
    if (!record.is_object() || !record.contains("doc_id") || !record["doc_id"].is_string()) {
      throw Error(where(source, line_no, {}) + ": record needs a string \"doc_id\"");
    }
    CorpusDocument doc;
    doc.doc_id = unicode::nfc(record["doc_id"].get<std::string>());
    if (doc.doc_id.empty()) throw Error(where(source, line_no, {}) + ": empty doc_id");
    if (!record.contains("tokens") || !record["tokens"].is_array()) {
      throw Error(where(source, line_no, doc.doc_id) + ": record needs a \"tokens\" array");
    }
    std::size_t index = 0;
    for (const auto& t : record["tokens"]) {
      if (!t.is_object() || !t.contains("surface") || !t.contains("lemma") ||
          !t["surface"].is_string() || !t["lemma"].is_string()) {
        throw Error(where(source, line_no, doc.doc_id) + ": token " + std::to_string(index) +
                    " needs string \"surface\" and \"lemma\"");
      }
      doc.tokens.push_back(make_token(t["surface"].get<std::string>(),
                                      t["lemma"].get<std::string>(), source, line_no, doc.doc_id));
      ++index;
    }
    stream.documents.push_back(std::move(doc));
  }
  check_unique_ids(stream, source);
  return stream;
}

LemmaStream read_lemma_stream_tsv(std::istream& in, const std::string& source) {
  LemmaStream stream;
  std::set<std::string> closed;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto first = line.find('\t');
    const auto second = first == std::string::npos ? first : line.find('\t', first + 1);
    if (second == std::string::npos || line.find('\t', second + 1) != std::string::npos) {
      const std::string doc_id = first == std::string::npos ? std::string() : line.substr(0, first);
      throw Error(where(source, line_no, doc_id) + ": expected doc_id<TAB>surface<TAB>lemma");
    }
    unicode::require_utf8(line, where(source, line_no, {}));
    std::string doc_id = unicode::nfc(line.substr(0, first));
    if (doc_id.empty()) throw Error(where(source, line_no, {}) + ": empty doc_id");
    if (stream.documents.empty() || stream.documents.back().doc_id != doc_id) {
      if (!stream.documents.empty()) closed.insert(stream.documents.back().doc_id);
      if (closed.count(doc_id)) {
        throw Error(where(source, line_no, doc_id) + ": tokens of a document must be contiguous");
      }
      stream.documents.push_back(CorpusDocument{doc_id, {}});
    }
    stream.documents.back().tokens.push_back(
        make_token(std::string_view(line).substr(first + 1, second - first - 1),
                   std::string_view(line).substr(second + 1), source, line_no, doc_id));
  }
  return stream;
}

LemmaStream read_lemma_stream(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(path.string() + ": cannot open corpus file");
  const auto ext = path.extension().string();
  if (ext == ".tsv" || ext == ".txt") return read_lemma_stream_tsv(in, path.string());
  return read_lemma_stream_jsonl(in, path.string());
}

LemmaStream concat(std::vector<LemmaStream> streams) {
  LemmaStream out;
  for (auto& s : streams) {
    for (auto& doc : s.documents) out.documents.push_back(std::move(doc));
  }
  check_unique_ids(out, "corpus");
  return out;
}

void write_lemma_stream_jsonl(std::ostream& out, const LemmaStream& stream) {
  for (const auto& doc : stream.documents) {
    json tokens = json::array();
    for (const auto& t : doc.tokens) tokens.push_back({{"surface", t.surface}, {"lemma", t.lemma}});
    out << json{{"doc_id", doc.doc_id}, {"tokens", tokens}}.dump() << '\n';
  }
}

double zipf_scale(std::uint64_t count, std::uint64_t total_tokens) {
  if (total_tokens == 0) throw Error("zipf: corpus has zero tokens");
  if (count == 0) return 0.0;
  return std::log10(static_cast<double>(count) * kPerBillion / static_cast<double>(total_tokens));
}

FrequencyIndex FrequencyIndex::build(const LemmaStream& stream, std::string source_label,
                                     unsigned threads) {
  const std::size_t total = stream.token_count();
  if (stream.documents.empty() || total == 0) throw Error("empty corpus");

  const std::size_t docs = stream.documents.size();
  const std::size_t chunks = std::clamp<std::size_t>(threads, 1, docs);
  Counts counts;
  if (chunks == 1) {
    for (const auto& doc : stream.documents) count_into(counts, doc);
  } else {
    std::vector<std::future<Counts>> parts;
    for (std::size_t c = 0; c < chunks; ++c) {
      const std::size_t begin = docs * c / chunks;
      const std::size_t end = docs * (c + 1) / chunks;
      parts.push_back(std::async(std::launch::async, [&stream, begin, end] {
        Counts local;
        for (std::size_t d = begin; d < end; ++d) count_into(local, stream.documents[d]);
        return local;
      }));
    }
    for (auto& part : parts) {
      for (auto& [lemma, n] : part.get()) counts[lemma] += n;
    }
  }
  return FrequencyIndex(std::move(counts), total, std::move(source_label));
}

FrequencyIndex FrequencyIndex::from_counts(Counts counts, std::uint64_t total_tokens,
                                           std::string source_label) {
  std::uint64_t sum = 0;
  for (const auto& [lemma, n] : counts) {
    if (lemma.empty()) throw Error("frequency index: empty lemma");
    if (n == 0) throw Error("frequency index: zero count for lemma '" + lemma + "'");
    if (!unicode::is_nfc(lemma)) throw Error("frequency index: lemma not NFC: '" + lemma + "'");
    sum += n;
  }
  if (sum != total_tokens) {
    throw Error("frequency index: counts sum to " + std::to_string(sum) + " but total is " +
                std::to_string(total_tokens));
  }
  return FrequencyIndex(std::move(counts), total_tokens, std::move(source_label));
}

FrequencyIndex FrequencyIndex::read(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  auto parse_count = [&](std::string_view text) {
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw Error(source + ":" + std::to_string(line_no) + ": bad count '" + std::string(text) + "'");
    }
    return value;
  };

  if (!std::getline(in, line)) throw Error(source + ": empty index file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.rfind("#total\t", 0) != 0) throw Error(source + ":1: expected '#total<TAB>N' header");
  const std::uint64_t total = parse_count(std::string_view(line).substr(7));

  Counts counts;
  std::string previous;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos || tab == 0) {
      throw Error(source + ":" + std::to_string(line_no) + ": expected lemma<TAB>count");
    }
    std::string lemma = line.substr(0, tab);
    unicode::require_utf8(lemma, source + ":" + std::to_string(line_no));
    if (!counts.empty() && !(previous < lemma)) {
      throw Error(source + ":" + std::to_string(line_no) + ": lemmas not strictly sorted at '" +
                  lemma + "'");
    }
    previous = lemma;
    counts.emplace(std::move(lemma), parse_count(std::string_view(line).substr(tab + 1)));
  }
  try {
    return from_counts(std::move(counts), total, source);
  } catch (const Error& e) {
    throw Error(source + ": " + e.what());
  }
}

FrequencyIndex FrequencyIndex::read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(path.string() + ": cannot open index file");
  return read(in, path.string());
}

void FrequencyIndex::write(std::ostream& out) const {
  out << "#total\t" << total_tokens_ << '\n';
  for (const auto& [lemma, n] : counts_) out << lemma << '\t' << n << '\n';
}

std::uint64_t FrequencyIndex::frequency(std::string_view lemma) const {
  return frequency_normalized(unicode::nfc(lemma));
}

std::uint64_t FrequencyIndex::frequency_normalized(std::string_view lemma) const {
  const auto it = counts_.find(lemma);
  return it == counts_.end() ? 0 : it->second;
}

double FrequencyIndex::zipf(std::string_view lemma) const {
  return zipf_scale(frequency(lemma), total_tokens_);
}

}  // namespace philoscope

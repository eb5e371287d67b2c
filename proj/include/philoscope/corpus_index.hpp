#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace philoscope {

struct CorpusToken {
  std::string surface;
  std::string lemma;
};

struct CorpusDocument {
  std::string doc_id;
  std::vector<CorpusToken> tokens;
};

// Lemmatized corpus in document order. Readers NFC-normalize surfaces and
// lemmas, reject empty lemmas and duplicate doc_ids.
struct LemmaStream {
  std::vector<CorpusDocument> documents;

  std::size_t token_count() const;
};

// JSON Lines: {"doc_id": "...", "tokens": [{"surface": "...", "lemma": "..."}]}
LemmaStream read_lemma_stream_jsonl(std::istream& in, const std::string& source);
// TSV fallback: doc_id<TAB>surface<TAB>lemma, one token per line, documents contiguous.
LemmaStream read_lemma_stream_tsv(std::istream& in, const std::string& source);
// Picks the reader from the extension (.tsv/.txt -> TSV, otherwise JSON Lines).
LemmaStream read_lemma_stream(const std::filesystem::path& path);
// Concatenates streams; doc_ids must stay unique across them.
LemmaStream concat(std::vector<LemmaStream> streams);

void write_lemma_stream_jsonl(std::ostream& out, const LemmaStream& stream);

// Zipf scale as log10 of frequency per billion tokens. The only place the
// per-billion constant lives.
double zipf_scale(std::uint64_t count, std::uint64_t total_tokens);

// Immutable lemma -> token count table. Lemmas are NFC byte strings; lookups
// normalize the query first, so any canonically equivalent spelling hits.
class FrequencyIndex {
 public:
  using Counts = std::map<std::string, std::uint64_t, std::less<>>;

  // `threads` > 1 counts documents in parallel chunks and merges the partial
  // tables; the result does not depend on the thread count.
  static FrequencyIndex build(const LemmaStream& stream, std::string source_label = {},
                              unsigned threads = 1);
  // Validates: counts >= 1, keys non-empty NFC, sum == total.
  static FrequencyIndex from_counts(Counts counts, std::uint64_t total_tokens,
                                    std::string source_label = {});

  // Index file: "#total<TAB>N" then "lemma<TAB>count" sorted by lemma bytes.
  static FrequencyIndex read(std::istream& in, const std::string& source);
  static FrequencyIndex read_file(const std::filesystem::path& path);
  void write(std::ostream& out) const;

  std::uint64_t frequency(std::string_view lemma) const;
  // For lemmas already in NFC; skips normalization.
  std::uint64_t frequency_normalized(std::string_view lemma) const;
  // 0.0 for absent lemmas, zipf_scale(count, total) otherwise.
  double zipf(std::string_view lemma) const;

  std::uint64_t total_tokens() const { return total_tokens_; }
  std::size_t size() const { return counts_.size(); }
  const Counts& counts() const { return counts_; }
  const std::string& source_label() const { return source_label_; }

  // Compares counts and total; the source label is metadata.
  friend bool operator==(const FrequencyIndex& a, const FrequencyIndex& b) {
    return a.total_tokens_ == b.total_tokens_ && a.counts_ == b.counts_;
  }

 private:
  FrequencyIndex(Counts counts, std::uint64_t total, std::string label)
      : counts_(std::move(counts)), total_tokens_(total), source_label_(std::move(label)) {}

  Counts counts_;
  std::uint64_t total_tokens_ = 0;
  std::string source_label_;
};

}  // namespace philoscope

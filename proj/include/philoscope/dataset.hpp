#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "philoscope/lexical_metrics.hpp"
#include "philoscope/mqm_scorer.hpp"
#include "philoscope/rarity_profiler.hpp"

namespace philoscope {

// A documented disagreement between two published tables for one cell.
struct KnownDiscrepancy {
  TranslationKey key;
  std::string field;  // "tqs"
  std::string canonical;
  std::string other;
  std::string other_source;

  friend bool operator==(const KnownDiscrepancy&, const KnownDiscrepancy&) = default;
};

// TQS and rating as carried by a metric table, kept for cross-checking
// against the canonical severity table.
struct MetricTableTqs {
  TranslationKey key;
  std::optional<double> tqs;
  std::optional<Rating> rating;

  friend bool operator==(const MetricTableTqs&, const MetricTableTqs&) = default;
};

// A published per-model (or aggregate, model empty) summary row.
struct PublishedAggregate {
  std::string text;
  std::string model;
  double tqs_mean = 0.0;
  double tqs_sd = 0.0;
  int critical = 0;

  friend bool operator==(const PublishedAggregate&, const PublishedAggregate&) = default;
};

// A published severity count per text; severity unset for the total.
struct PublishedSeverity {
  std::string text;
  std::optional<Severity> severity;
  int count = 0;

  friend bool operator==(const PublishedSeverity&, const PublishedSeverity&) = default;
};

struct ProfileRecord {
  PassageProfile profile;
  std::optional<double> stored_rare_ratio;
  std::optional<double> stored_nf_ratio;
  std::optional<Risk> stored_risk;

  friend bool operator==(const ProfileRecord&, const ProfileRecord&) = default;
};

struct Dataset {
  std::vector<ScoredTranslation> translations;
  std::vector<TranslationRecord> annotations;
  std::vector<KeyedMetricScore> metric_scores;
  std::vector<MetricTableTqs> metric_table_tqs;
  std::vector<ProfileRecord> profiles;
  std::vector<KnownDiscrepancy> known_discrepancies;
  std::vector<PublishedAggregate> published_aggregates;
  std::vector<PublishedSeverity> published_severity;
  std::string version;

  // Load bookkeeping, not part of the content.
  std::map<std::string, std::size_t> row_counts;     // file name -> data rows
  std::map<std::string, std::size_t> expected_rows;  // from VERSION

  const ScoredTranslation* find(const TranslationKey& key) const;
  const KnownDiscrepancy* known(const TranslationKey& key, std::string_view field) const;
  std::vector<PassageProfile> passage_profiles() const;
  std::vector<std::string> texts() const;

  friend bool operator==(const Dataset& a, const Dataset& b);
};

struct LoadOptions {
  bool strict = false;
  RiskBands bands;
};

struct LoadResult {
  Dataset dataset;
  std::vector<std::string> warnings;
};

// Paths are CSV files, VERSION / fixtures.sha256 files, or directories
// (every *.csv plus VERSION and fixtures.sha256 inside). The role of each
// CSV is recognised from its header.
LoadResult load(std::span<const std::filesystem::path> paths, const LoadOptions& options = {});

// Writes one file per role into `dir` plus a checksum manifest; loading the
// directory again yields an equal Dataset.
void save(const Dataset& dataset, const std::filesystem::path& dir);

struct FixtureDiff {
  std::string check;
  std::string location;
  std::string stored;
  std::string recomputed;
  bool known = false;
};

struct VerifyReport {
  std::size_t checks = 0;
  std::vector<FixtureDiff> diffs;

  std::size_t unexplained() const;
};

VerifyReport verify_fixtures(const Dataset& dataset);

// sha256sum-format manifest helpers.
std::map<std::string, std::string> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& dir, std::span<const std::string> files);

}  // namespace philoscope

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "philoscope/dataset.hpp"
#include "philoscope/lexical_metrics.hpp"
#include "philoscope/mqm_scorer.hpp"
#include "philoscope/rarity_profiler.hpp"

namespace philoscope::report {

enum class Format { Markdown, Csv };

std::string_view to_string(Format f);
Format parse_format(std::string_view text);

// Tables in rendering order.
inline const std::vector<std::string> kTableIds{"T1", "T2", "T3", "T4", "T5", "T6",
                                                "T7", "T8", "S3", "S4", "S5", "S6"};

struct Spec {
  std::vector<std::string> tables;  // ids from kTableIds, or "all"
  Format format = Format::Markdown;
  std::vector<Stratum> strata;
  std::string baseline_text = "Mix";
  BleuSmoothing smoothing = BleuSmoothing::None;
  ProfileOptions profile;
  std::optional<std::uint64_t> seed;  // enables the bootstrap in T7
  std::size_t resamples = 10000;
};

struct Cell {
  std::string text;
  std::string explain;  // producing operation and inputs; empty for labels
};

struct Table {
  std::string id;
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::string> notes;
};

struct Report {
  std::vector<std::string> header;  // fixture version, strata, parameters
  std::vector<Table> tables;

  const Table* find(std::string_view id) const;
};

// Errors name the missing inputs when a requested table cannot be built.
Report build(const Spec& spec, const Dataset& dataset);

std::string render(const Report& report, Format format);

// Reference "<table>:<row>:<column>", row 1-based over data rows, column
// 1-based or a column header.
std::string explain(const Report& report, std::string_view reference);

// Number formatting shared by the tables.
std::string format_coefficient(double r, int decimals = 2);  // "+0.75", "-0.00"
std::string format_bound(double v);                          // ".62", "-.02"
std::string format_p(double p);                              // "< .001", ".044"

}  // namespace philoscope::report

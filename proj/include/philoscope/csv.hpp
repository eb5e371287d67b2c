#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace philoscope::csv {

// RFC 4180 records. Lines starting with '#' at record start are metadata
// comments; blank lines are skipped.
struct Record {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

struct Table {
  std::string source;
  std::vector<std::string> header;
  std::vector<Record> rows;
  std::vector<std::string> comments;

  std::optional<std::size_t> column(std::string_view name) const;
  bool has_columns(const std::vector<std::string>& names) const;
};

Table read(std::istream& in, std::string source);
Table read_file(const std::filesystem::path& path);

std::string escape(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

// Typed access to one row, with errors that carry source, line and column.
class Row {
 public:
  Row(const Table& table, const Record& record) : table_(table), record_(record) {}

  std::size_t line() const { return record_.line; }
  bool has(std::string_view name) const;
  const std::string& text(std::string_view name) const;
  std::string required_text(std::string_view name) const;
  long long integer(std::string_view name) const;
  double real(std::string_view name) const;
  std::optional<long long> optional_integer(std::string_view name) const;

  [[noreturn]] void fail(std::string_view name, const std::string& message) const;
  [[noreturn]] void fail(const std::string& message) const;

 private:
  std::size_t index(std::string_view name) const;

  const Table& table_;
  const Record& record_;
};

}  // namespace philoscope::csv

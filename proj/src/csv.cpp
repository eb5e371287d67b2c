#include "philoscope/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "philoscope/error.hpp"
#include "philoscope/unicode.hpp"

namespace philoscope::csv {
namespace {

std::string location(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line);
}

// Parses one record starting at `pos`; advances pos and line.
std::vector<std::string> parse_record(std::string_view data, std::size_t& pos,
                                      std::size_t& line, const std::string& source) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool field_started_quoted = false;
  const std::size_t start_line = line;
  while (pos < data.size()) {
    const char c = data[pos];
    if (quoted) {
      if (c == '"') {
        if (pos + 1 < data.size() && data[pos + 1] == '"') {
          field.push_back('"');
          pos += 2;
          continue;
        }
        quoted = false;
        ++pos;
        continue;
      }
      if (c == '\n') ++line;
      field.push_back(c);
      ++pos;
      continue;
    }
    if (c == '"') {
      if (!field.empty()) {
        throw Error(location(source, line) + ": stray quote inside unquoted field");
      }
      quoted = true;
      field_started_quoted = true;
      ++pos;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      field_started_quoted = false;
      ++pos;
    } else if (c == '\r' && pos + 1 < data.size() && data[pos + 1] == '\n') {
      ++pos;
    } else if (c == '\n') {
      ++pos;
      ++line;
      fields.push_back(std::move(field));
      return fields;
    } else {
      if (field_started_quoted) {
        throw Error(location(source, line) + ": text after closing quote");
      }
      field.push_back(c);
      ++pos;
    }
  }
  if (quoted) {
    throw Error(location(source, start_line) + ": unterminated quoted field");
  }
  fields.push_back(std::move(field));
  return fields;
}

}  // namespace

std::optional<std::size_t> Table::column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) return std::nullopt;
  return static_cast<std::size_t>(it - header.begin());
}

bool Table::has_columns(const std::vector<std::string>& names) const {
  return std::all_of(names.begin(), names.end(),
                     [&](const std::string& n) { return column(n).has_value(); });
}

Table read(std::istream& in, std::string source) {
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string data = buffer.str();
  unicode::require_utf8(data, source);

  Table table;
  table.source = std::move(source);
  std::size_t pos = 0;
  std::size_t line = 1;
  if (data.size() >= 3 && data.compare(0, 3, "\xEF\xBB\xBF") == 0) pos = 3;

  bool have_header = false;
  while (pos < data.size()) {
    const std::size_t record_line = line;
    if (data[pos] == '\n' || (data[pos] == '\r' && pos + 1 < data.size() && data[pos + 1] == '\n')) {
      pos = data.find('\n', pos) + 1;
      ++line;
      continue;
    }
    if (data[pos] == '#') {
      const std::size_t end = data.find('\n', pos);
      std::string comment = data.substr(pos + 1, end == std::string::npos ? std::string::npos : end - pos - 1);
      if (!comment.empty() && comment.back() == '\r') comment.pop_back();
      table.comments.push_back(std::move(comment));
      pos = end == std::string::npos ? data.size() : end + 1;
      ++line;
      continue;
    }
    auto fields = parse_record(data, pos, line, table.source);
    if (!have_header) {
      for (auto& f : fields) f = unicode::trim(f);
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw Error(location(table.source, record_line) + ": expected " +
                  std::to_string(table.header.size()) + " fields, found " +
                  std::to_string(fields.size()));
    }
    table.rows.push_back(Record{record_line, std::move(fields)});
  }
  if (!have_header) throw Error(table.source + ": empty CSV (no header)");
  return table;
}

Table read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(path.string() + ": cannot open file");
  return read(in, path.string());
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos &&
      (field.empty() || field.front() != '#')) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

bool Row::has(std::string_view name) const { return table_.column(name).has_value(); }

std::size_t Row::index(std::string_view name) const {
  const auto idx = table_.column(name);
  if (!idx) fail("missing column '" + std::string(name) + "'");
  return *idx;
}

const std::string& Row::text(std::string_view name) const { return record_.fields[index(name)]; }

std::string Row::required_text(std::string_view name) const {
  std::string value = unicode::trim(text(name));
  if (value.empty()) fail(name, "empty value");
  return value;
}

long long Row::integer(std::string_view name) const {
  const std::string value = required_text(name);
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    fail(name, "not an integer: '" + value + "'");
  }
  return out;
}

double Row::real(std::string_view name) const {
  const std::string value = required_text(name);
  double out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(out)) {
    fail(name, "not a finite number: '" + value + "'");
  }
  return out;
}

std::optional<long long> Row::optional_integer(std::string_view name) const {
  if (!has(name) || unicode::trim(text(name)).empty()) return std::nullopt;
  return integer(name);
}

void Row::fail(std::string_view name, const std::string& message) const {
  const auto idx = table_.column(name);
  std::string where = location(table_.source, record_.line) + ": column '" + std::string(name) + "'";
  if (idx) where += " (#" + std::to_string(*idx + 1) + ")";
  throw Error(where + ": " + message);
}

void Row::fail(const std::string& message) const {
  throw Error(location(table_.source, record_.line) + ": " + message);
}

}  // namespace philoscope::csv

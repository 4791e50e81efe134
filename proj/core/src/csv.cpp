#include "coveropt/csv.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

namespace coveropt {

SchemaError::SchemaError(std::size_t row, std::string field, const std::string& message)
    : std::runtime_error("row " + std::to_string(row) + ", field '" + field + "': " + message),
      row_(row),
      field_(std::move(field)) {}

bool CsvReader::next(std::vector<std::string>& fields) {
  fields.clear();
  std::string line;
  while (std::getline(in_, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::string field;
    bool quoted = false;
    std::size_t i = 0;
    for (;;) {
      if (i == line.size()) {
        if (!quoted) break;
        // Quoted field spans a newline.
        std::string more;
        if (!std::getline(in_, more)) {
          throw SchemaError(0, "", "unterminated quoted field");
        }
        if (!more.empty() && more.back() == '\r') more.pop_back();
        field += '\n';
        line = std::move(more);
        i = 0;
        continue;
      }
      const char c = line[i++];
      if (quoted) {
        if (c == '"') {
          if (i < line.size() && line[i] == '"') {
            field += '"';
            ++i;
          } else {
            quoted = false;
          }
        } else {
          field += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
      } else {
        field += c;
      }
    }
    fields.push_back(std::move(field));
    return true;
  }
  return false;
}

void expect_header(CsvReader& reader, std::span<const std::string_view> expected) {
  std::vector<std::string> header;
  if (!reader.next(header)) {
    throw SchemaError(0, "", "missing header");
  }
  std::string want;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i) want += ',';
    want += expected[i];
  }
  bool ok = header.size() == expected.size();
  for (std::size_t i = 0; ok && i < header.size(); ++i) ok = header[i] == expected[i];
  if (!ok) {
    std::string got;
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) got += ',';
      got += header[i];
    }
    throw SchemaError(0, "header", "expected '" + want + "', got '" + got + "'");
  }
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_csv_row(std::ostream& out, std::span<const std::string> fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << csv_escape(fields[i]);
  }
  out << '\n';
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::size_t row, std::string_view field) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (text.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
    throw SchemaError(row, std::string(field), "not a finite number: '" + std::string(text) + "'");
  }
  return v;
}

std::int64_t parse_int(std::string_view text, std::size_t row, std::string_view field) {
  std::int64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (text.empty() || res.ec != std::errc() || res.ptr != end) {
    throw SchemaError(row, std::string(field), "not an integer: '" + std::string(text) + "'");
  }
  return v;
}

bool parse_flag(std::string_view text, std::size_t row, std::string_view field) {
  if (text == "0") return false;
  if (text == "1") return true;
  throw SchemaError(row, std::string(field), "expected 0 or 1, got '" + std::string(text) + "'");
}

}  // namespace coveropt

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace coveropt {

// A record or header that does not conform to its file schema. Carries the
// 1-based data row (0 for the header) and the offending field name.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::size_t row, std::string field, const std::string& message);

  std::size_t row() const noexcept { return row_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t row_;
  std::string field_;
};

// RFC 4180-style reader: quoted fields, doubled quotes, embedded commas and
// newlines. A trailing '\r' is dropped. Blank lines are skipped.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  bool next(std::vector<std::string>& fields);

 private:
  std::istream& in_;
};

// Reads the header and rejects anything other than exactly `expected`.
void expect_header(CsvReader& reader, std::span<const std::string_view> expected);

std::string csv_escape(std::string_view field);
void write_csv_row(std::ostream& out, std::span<const std::string> fields);

// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

double parse_double(std::string_view text, std::size_t row, std::string_view field);
std::int64_t parse_int(std::string_view text, std::size_t row, std::string_view field);
bool parse_flag(std::string_view text, std::size_t row, std::string_view field);

}  // namespace coveropt

#include "coveropt/io.hpp"

#include <fstream>

namespace coveropt {
namespace {

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return in;
}

template <typename Reader>
auto read_with_context(const std::filesystem::path& path, Reader reader) {
  auto in = open(path);
  try {
    return reader(in);
  } catch (const SchemaError& e) {
    throw SchemaError(e.row(), e.field(), path.string() + ": " + e.what());
  }
}

}  // namespace

std::vector<FacilitySite> read_facilities_file(const std::filesystem::path& path) {
  return read_with_context(path, [](std::istream& in) { return ingest_facilities(in); });
}

std::vector<DemandPoint> read_demand_file(const std::filesystem::path& path) {
  return read_with_context(path, [](std::istream& in) { return ingest_demand(in); });
}

std::vector<ZctaFragment> read_fragments_file(const std::filesystem::path& path) {
  return read_with_context(path, [](std::istream& in) { return ingest_fragments(in); });
}

CoverageField read_field_file(const std::filesystem::path& path) {
  return read_with_context(path, [](std::istream& in) { return ingest_field(in); });
}

std::vector<std::string> read_plan_file(const std::filesystem::path& path) {
  return read_with_context(path, [](std::istream& in) {
    CsvReader reader(in);
    constexpr std::string_view header[] = {"zcta", "load"};
    expect_header(reader, header);
    std::vector<std::string> ids;
    std::vector<std::string> f;
    for (std::size_t row = 1; reader.next(f); ++row) {
      if (f.size() != 2) throw SchemaError(row, "", "expected 2 fields");
      parse_int(f[1], row, "load");
      ids.push_back(f[0]);
    }
    return ids;
  });
}

}  // namespace coveropt

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "coveropt/dataset.hpp"
#include "coveropt/report.hpp"

namespace coveropt {

// File wrappers over the stream readers. A missing or unreadable file raises
// IoError naming the path; schema problems raise SchemaError prefixed with it.
std::vector<FacilitySite> read_facilities_file(const std::filesystem::path& path);
std::vector<DemandPoint> read_demand_file(const std::filesystem::path& path);
std::vector<ZctaFragment> read_fragments_file(const std::filesystem::path& path);
CoverageField read_field_file(const std::filesystem::path& path);

// Site ids from a plan CSV (`zcta,load`).
std::vector<std::string> read_plan_file(const std::filesystem::path& path);

}  // namespace coveropt

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "coveropt/coverage.hpp"
#include "coveropt/dataset.hpp"
#include "coveropt/optimize.hpp"

namespace coveropt::cli {

// Bad flag values, unknown config keys and the like. Exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ScopeKind { nation, state };

struct RunConfig {
  double radius_miles = kDefaultRadiusMiles;
  Persons capacity = kDefaultCapacity;
  std::uint64_t seed = 0;
  std::size_t n_samples = kDefaultSamples;
  std::size_t patience = kDefaultPatience;
  ScopeKind scope = ScopeKind::nation;
  int k = 1;
  double dedupe_eps_miles = kDefaultDedupeEpsMiles;
  std::size_t batch = 1;
  std::size_t network_size = 0;  // 0: size of the current facility network
  CandidatePolicy candidates = CandidatePolicy::underserved;
  RegionKind region_kind = RegionKind::state;
  std::filesystem::path in_facilities;
  std::filesystem::path in_demand;
  std::filesystem::path in_fragments;
  std::filesystem::path in_plan;
  std::filesystem::path out_dir = ".";

  // Throws UsageError naming the first non-positive or empty field.
  void validate() const;
};

// Applies one `key = value` setting by RunConfig field name.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

// Flat key-value file: one `key = value` per line, '#' starts a comment.
// Keys are RunConfig field names.
void apply_config_stream(RunConfig& config, std::istream& in);
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

}  // namespace coveropt::cli

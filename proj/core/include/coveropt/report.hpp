#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "coveropt/coverage.hpp"
#include "coveropt/dataset.hpp"
#include "coveropt/optimize.hpp"

namespace coveropt {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ComparisonRow {
  std::string region_id;
  std::size_t current_count = 0;
  std::size_t optimal_count = 0;
  long long delta = 0;  // optimal - current

  friend bool operator==(const ComparisonRow&, const ComparisonRow&) = default;
};

// Per-region site counts of two networks, given the region of each site.
// Sorted by |delta| descending, then region id.
std::vector<ComparisonRow> compare_networks(std::span<const std::string> current_site_regions,
                                            std::span<const std::string> optimal_site_regions);

// Region of each facility (by zip through `regions`, or by state). Facilities
// outside every region map to "".
std::vector<std::string> facility_regions(std::span<const FacilitySite> facilities,
                                          const RegionMap& regions,
                                          FacilityAttribution attribution);

// Region of each plan site, through the demand point it sits on.
std::vector<std::string> plan_regions(const NetworkPlan& plan, const CoverageMatrix& matrix,
                                      std::span<const DemandPoint> demand,
                                      const RegionMap& regions);

struct GainsRow {
  std::string region_id;
  Persons currently_covered = 0;
  Persons gain_add_one = 0;
  Persons gain_rearrange = 0;

  friend bool operator==(const GainsRow&, const GainsRow&) = default;
};

// Joins per-state add-one and rearrange results on state code.
std::vector<GainsRow> gains_by_state(std::span<const StateResult> add_one,
                                     std::span<const StateResult> rearranged);

struct QuantilePoint {
  double q = 0.0;
  double miles = 0.0;

  friend bool operator==(const QuantilePoint&, const QuantilePoint&) = default;
};

// Demand-weighted quantiles of nearest-facility distance. Points without a
// distance are left out.
std::vector<QuantilePoint> quantile_curve(const CoverageField& field,
                                          std::span<const DemandPoint> demand,
                                          std::span<const double> grid);

// {1/n, 2/n, ..., (n-1)/n}; n = 100 gives the 99-point percentile grid.
std::vector<double> percentile_grid(std::size_t n = 100);

// A header plus string cells; every emitter goes through this.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

Table field_table(const CoverageField& field);
Table region_stats_table(std::span<const RegionStats> stats);
Table comparison_table(std::span<const ComparisonRow> rows);
Table gains_table(std::span<const GainsRow> rows);
Table quantile_table(std::span<const QuantilePoint> curve);
Table greedy_table(std::span<const Placement> placements, const CoverageMatrix& matrix);
Table plan_table(const NetworkPlan& plan, const CoverageMatrix& matrix);

// Reads the field CSV written from field_table back into a field.
CoverageField ingest_field(std::istream& in);

std::string to_csv(const Table& table);
void emit_csv(const Table& table, const std::filesystem::path& path);

enum class SiteRole { existing, added, rearranged };
std::string_view to_string(SiteRole role);

struct SiteFeature {
  std::string id;
  GeoPoint point;
  SiteRole role = SiteRole::existing;
};

// GeoJSON FeatureCollection text. Coordinates are [lon, lat].
std::string field_geojson(const CoverageField& field, std::span<const DemandPoint> demand);
std::string sites_geojson(std::span<const SiteFeature> sites);

void emit_text(const std::string& text, const std::filesystem::path& path);

}  // namespace coveropt

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coveropt/dataset.hpp"
#include "coveropt/geo.hpp"

namespace coveropt {

inline constexpr double kDefaultRadiusMiles = 12.0;
inline constexpr double kAlternateRadiusMiles = 15.0;

struct FieldRecord {
  std::string zcta;
  std::optional<std::string> facility_id;
  std::optional<double> distance_miles;  // absent iff there are no facilities
  bool covered = false;                  // distance present and <= radius

  friend bool operator==(const FieldRecord&, const FieldRecord&) = default;
};

// Nearest-facility distance per demand point, in demand order.
struct CoverageField {
  double radius_miles = kDefaultRadiusMiles;
  std::vector<FieldRecord> records;

  friend bool operator==(const CoverageField&, const CoverageField&) = default;
};

CoverageField compute_field(std::span<const DemandPoint> demand,
                            std::span<const FacilitySite> facilities, double radius_miles);

// Same, over a prebuilt facility index whose ids are facility ids.
CoverageField compute_field(std::span<const DemandPoint> demand, const SpatialIndex& facilities,
                            double radius_miles);

SpatialIndex index_facilities(std::span<const FacilitySite> facilities);
SpatialIndex index_demand(std::span<const DemandPoint> demand);

/// Left-continuous inverse of the weighted ECDF: the smallest value v with
/// (weight of values <= v) / (total weight) >= q. Zero-weight entries are
/// ignored. Throws InvalidInput on mismatched lengths, negative or non-finite
/// weights, zero total weight, or q outside [0, 1].
double weighted_quantile(std::span<const double> values, std::span<const double> weights, double q);

// Sorted form of the above for evaluating many q against one sample.
class WeightedQuantiles {
 public:
  WeightedQuantiles(std::span<const double> values, std::span<const double> weights);

  double operator()(double q) const;
  double total_weight() const noexcept { return total_; }

 private:
  std::vector<double> values_;
  std::vector<double> cumulative_;
  double total_ = 0.0;
};

struct CoverageSplit {
  Persons covered = 0;
  Persons underserved = 0;

  friend bool operator==(const CoverageSplit&, const CoverageSplit&) = default;
};

// `field` must have been computed over `demand` (same order).
CoverageSplit classify(const CoverageField& field, std::span<const DemandPoint> demand);

struct RegionStats {
  std::string region_id;
  Persons population = 0;
  std::optional<double> weighted_mean_distance;  // absent when no weighted distances
  std::size_t facility_count = 0;
  Persons covered_population = 0;
  Persons underserved_population = 0;

  friend bool operator==(const RegionStats&, const RegionStats&) = default;
};

// How a facility is placed into a region: through its zip looked up in the
// zcta region map, or directly by its state code.
enum class FacilityAttribution { by_zip, by_state };

// Per-region aggregates, sorted by region id. Demand points missing from
// `regions` are skipped. Points with no distance count as underserved and are
// left out of the mean.
std::vector<RegionStats> aggregate(const CoverageField& field, std::span<const DemandPoint> demand,
                                   const RegionMap& regions,
                                   std::span<const FacilitySite> facilities,
                                   FacilityAttribution attribution);

// Linear-interpolation ("type 7") sample quantile. `values` need not be sorted.
double type7_quantile(std::vector<double> values, double p);

struct UnderservedRegions {
  double distance_threshold = 0.0;    // Q3 of weighted mean distance
  double population_threshold = 0.0;  // Q3 of population
  std::vector<std::string> region_ids;
};

/// Regions strictly above the third quartile of both weighted mean distance
/// and population. Quartiles are unweighted across regions that have a mean
/// distance. Throws InvalidInput with fewer than four such regions.
UnderservedRegions find_underserved(std::span<const RegionStats> stats);

// Pearson product-moment coefficient. Throws InvalidInput on length mismatch,
// fewer than two values, or a constant series.
double correlation(std::span<const double> x, std::span<const double> y);

struct CandidateSite {
  std::string id;
  GeoPoint point;
  std::string state;
  std::optional<std::size_t> demand_index;  // set when the site is a demand centroid
};

/// For each candidate site, the demand points within the radius (inclusive)
/// and their distances, stored in compressed rows ordered by demand index.
class CoverageMatrix {
 public:
  CoverageMatrix() = default;

  static CoverageMatrix build(std::span<const DemandPoint> demand,
                              std::span<const CandidateSite> candidates, double radius_miles);

  // Candidates are every demand centroid, id = zcta.
  static CoverageMatrix over_demand(std::span<const DemandPoint> demand, double radius_miles);

  double radius_miles() const noexcept { return radius_; }
  std::size_t candidate_count() const noexcept { return candidates_.size(); }
  std::size_t demand_count() const noexcept { return demand_weight_.size(); }
  std::size_t entry_count() const noexcept { return entries_.size(); }

  const CandidateSite& candidate(std::size_t c) const { return candidates_.at(c); }
  std::span<const CandidateSite> candidates() const noexcept { return candidates_; }

  std::span<const std::uint32_t> demand_of(std::size_t c) const {
    return {entries_.data() + offsets_[c], entries_.data() + offsets_[c + 1]};
  }
  std::span<const double> miles_of(std::size_t c) const {
    return {miles_.data() + offsets_[c], miles_.data() + offsets_[c + 1]};
  }
  Persons covered_weight(std::size_t c) const { return covered_weight_[c]; }
  Persons demand_weight(std::size_t d) const { return demand_weight_[d]; }

  // Position of candidate c in ascending id order; the tie-break key.
  std::uint32_t rank(std::size_t c) const { return rank_[c]; }

  // Candidate index whose id equals `id`, if any.
  std::optional<std::size_t> find(std::string_view id) const;

 private:
  double radius_ = 0.0;
  std::vector<CandidateSite> candidates_;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> entries_;
  std::vector<double> miles_;
  std::vector<Persons> covered_weight_;
  std::vector<Persons> demand_weight_;
  std::vector<std::uint32_t> rank_;
  std::vector<std::uint32_t> by_id_;
};

// Per-demand covered flag (1 = covered) taken from a field.
std::vector<std::uint8_t> covered_mask(const CoverageField& field);

}  // namespace coveropt

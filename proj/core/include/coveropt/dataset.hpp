#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coveropt/csv.hpp"
#include "coveropt/geo.hpp"

namespace coveropt {

// Person counts. Integral so that coverage sums are exact.
using Persons = std::int64_t;

enum class Source : std::uint8_t {
  directory = 1 << 0,
  doj_roster = 1 << 1,
  referral_db = 1 << 2,
  manual = 1 << 3,
};

class SourceFlags {
 public:
  constexpr SourceFlags() = default;
  constexpr explicit SourceFlags(std::uint8_t bits) : bits_(bits) {}

  constexpr bool has(Source s) const noexcept { return (bits_ & static_cast<std::uint8_t>(s)) != 0; }
  constexpr void set(Source s) noexcept { bits_ |= static_cast<std::uint8_t>(s); }
  constexpr bool any() const noexcept { return bits_ != 0; }
  constexpr std::uint8_t bits() const noexcept { return bits_; }

  constexpr SourceFlags& operator|=(SourceFlags other) noexcept {
    bits_ |= other.bits_;
    return *this;
  }
  friend constexpr bool operator==(SourceFlags, SourceFlags) = default;

 private:
  std::uint8_t bits_ = 0;
};

struct FacilitySite {
  std::string id;
  std::string name;
  GeoPoint point;
  std::string state;  // two-letter code
  std::string zip;    // five digits
  SourceFlags sources;
  bool doj_recognized = false;

  friend bool operator==(const FacilitySite&, const FacilitySite&) = default;
};

struct DemandPoint {
  std::string zcta;
  GeoPoint centroid;
  Persons weight = 0;
  std::optional<std::string> cbsa_id;
  std::string state;

  friend bool operator==(const DemandPoint&, const DemandPoint&) = default;
};

enum class RegionKind { cbsa, county, commuting_zone, state, nation };

std::string_view to_string(RegionKind kind);
// Throws InvalidInput on an unknown name.
RegionKind parse_region_kind(std::string_view name);

struct Region {
  std::string id;
  RegionKind kind = RegionKind::cbsa;
  std::string name;

  friend bool operator==(const Region&, const Region&) = default;
};

// One (zcta x region) overlap with the population living in it.
struct ZctaFragment {
  std::string zcta;
  RegionKind kind = RegionKind::cbsa;
  std::string region_id;
  double population = 0.0;

  friend bool operator==(const ZctaFragment&, const ZctaFragment&) = default;
};

// zcta -> region id. Ordered so iteration is deterministic.
using RegionMap = std::map<std::string, std::string>;

bool is_state_code(std::string_view s);
bool is_five_digits(std::string_view s);

// Readers reject any header other than the exact schema and report the first
// bad row and field through SchemaError.
std::vector<FacilitySite> ingest_facilities(std::istream& in);
std::vector<DemandPoint> ingest_demand(std::istream& in);
std::vector<ZctaFragment> ingest_fragments(std::istream& in);

void emit_facilities(std::ostream& out, std::span<const FacilitySite> sites);
void emit_demand(std::ostream& out, std::span<const DemandPoint> demand);
void emit_fragments(std::ostream& out, std::span<const ZctaFragment> fragments);

// Case-folded, with everything except ASCII letters and digits removed and
// runs of whitespace collapsed to one space.
std::string normalize_name(std::string_view name);

inline constexpr double kDefaultDedupeEpsMiles = 0.05;

/// Merges offices that are the same organization at (nearly) the same place.
///
/// Sites with equal normalize_name() are linked when they lie within `eps`
/// miles of each other; linked components (single linkage) collapse into one
/// site. The merged site takes the smallest member id and that member's name,
/// the union of source flags, the OR of doj_recognized, and the location,
/// state and zip of the member closest to the component's mean position.
/// Output order follows the first appearance of each component in `sites`.
std::vector<FacilitySite> dedupe_by_location(std::span<const FacilitySite> sites,
                                             double eps = kDefaultDedupeEpsMiles);

// Assigns each zcta that has fragments of `kind` to the region holding the
// largest population share; ties go to the smallest region id.
RegionMap assign_region(std::span<const ZctaFragment> fragments, RegionKind kind);

// zcta -> state code of each demand point.
RegionMap state_regions(std::span<const DemandPoint> demand);

Persons total_weight(std::span<const DemandPoint> demand);

}  // namespace coveropt

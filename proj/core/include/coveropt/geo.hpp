#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace coveropt {

// Raised for out-of-range coordinates, negative radii and similar caller
// mistakes. Schema problems in input files use SchemaError (dataset.hpp).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kEarthRadiusMiles = 3958.7613;

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  bool valid() const noexcept;
  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

// Throws InvalidInput naming `what` when the point is non-finite or out of
// range.
void validate(const GeoPoint& p, std::string_view what = "point");

// Great-circle distance on a sphere of radius kEarthRadiusMiles.
// Symmetric bit-for-bit in its arguments.
double haversine_miles(const GeoPoint& a, const GeoPoint& b);

struct IndexEntry {
  std::string id;
  GeoPoint point;
};

struct Neighbor {
  std::size_t index = 0;  // position in the collection passed to build
  double miles = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Immutable 3-D k-d tree over unit vectors on the sphere.
///
/// Subtrees are pruned with a conservative chord-derived lower bound and every
/// surviving candidate is scored with haversine_miles, so answers are exactly
/// the ones a linear scan over all entries would produce. Ties on distance go
/// to the lexicographically smallest id.
class SpatialIndex {
 public:
  SpatialIndex() = default;

  // Throws InvalidInput on an invalid point or a duplicate id.
  static SpatialIndex build(std::span<const IndexEntry> entries);

  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }

  const std::string& id(std::size_t index) const { return ids_.at(index); }
  const GeoPoint& point(std::size_t index) const { return points_.at(index); }

  std::optional<Neighbor> nearest(const GeoPoint& q) const;

  // Entries with distance <= radius, sorted by (distance, id).
  std::vector<Neighbor> within_radius(const GeoPoint& q, double radius_miles) const;

 private:
  struct Node {
    double lo[3];
    double hi[3];
    std::uint32_t begin = 0;  // range into order_
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
  };

  std::int32_t build_node(std::uint32_t begin, std::uint32_t end, int depth);
  double lower_bound_miles(const Node& node, const double q[3]) const;
  bool better(std::size_t a, double da, std::size_t b, double db) const;

  std::vector<std::string> ids_;
  std::vector<GeoPoint> points_;
  std::vector<std::uint32_t> rank_;    // id order, used for tie breaks
  std::vector<std::uint32_t> order_;   // entry indices in tree order
  std::vector<double> xyz_;            // unit vectors, 3 per entry
  std::vector<Node> nodes_;
};

}  // namespace coveropt

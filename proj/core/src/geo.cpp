#include "coveropt/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace coveropt {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr std::uint32_t kLeafSize = 8;

// Pruning slack. Haversine loses precision near antipodes (asin close to 1),
// so the chord bound is widened by more than that error.
constexpr double kBoundRelSlack = 1e-9;
constexpr double kBoundAbsSlackMiles = 1e-3;

void to_unit(const GeoPoint& p, double* out) {
  const double lat = p.lat * kDegToRad;
  const double lon = p.lon * kDegToRad;
  out[0] = std::cos(lat) * std::cos(lon);
  out[1] = std::cos(lat) * std::sin(lon);
  out[2] = std::sin(lat);
}

}  // namespace

bool GeoPoint::valid() const noexcept {
  return std::isfinite(lat) && std::isfinite(lon) && lat >= -90.0 && lat <= 90.0 &&
         lon >= -180.0 && lon <= 180.0;
}

void validate(const GeoPoint& p, std::string_view what) {
  if (!p.valid()) {
    throw InvalidInput(std::string(what) + ": coordinate out of range (lat " +
                       std::to_string(p.lat) + ", lon " + std::to_string(p.lon) + ")");
  }
}

double haversine_miles(const GeoPoint& a, const GeoPoint& b) {
  validate(a, "haversine first point");
  validate(b, "haversine second point");
  // abs() of the differences keeps the result identical under argument swap.
  const double half_dlat = std::abs(a.lat - b.lat) * kDegToRad * 0.5;
  const double half_dlon = std::abs(a.lon - b.lon) * kDegToRad * 0.5;
  const double s_lat = std::sin(half_dlat);
  const double s_lon = std::sin(half_dlon);
  const double cos_prod = std::cos(a.lat * kDegToRad) * std::cos(b.lat * kDegToRad);
  double h = s_lat * s_lat + cos_prod * s_lon * s_lon;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusMiles * std::asin(std::sqrt(h));
}

SpatialIndex SpatialIndex::build(std::span<const IndexEntry> entries) {
  SpatialIndex index;
  const std::size_t n = entries.size();
  index.ids_.reserve(n);
  index.points_.reserve(n);
  index.xyz_.resize(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    validate(entries[i].point, "index entry '" + entries[i].id + "'");
    index.ids_.push_back(entries[i].id);
    index.points_.push_back(entries[i].point);
    to_unit(entries[i].point, &index.xyz_[3 * i]);
  }

  std::vector<std::uint32_t> by_id(n);
  std::iota(by_id.begin(), by_id.end(), 0u);
  std::sort(by_id.begin(), by_id.end(), [&](std::uint32_t a, std::uint32_t b) {
    return index.ids_[a] < index.ids_[b];
  });
  index.rank_.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    if (r > 0 && index.ids_[by_id[r]] == index.ids_[by_id[r - 1]]) {
      throw InvalidInput("duplicate index id '" + index.ids_[by_id[r]] + "'");
    }
    index.rank_[by_id[r]] = static_cast<std::uint32_t>(r);
  }

  index.order_.resize(n);
  std::iota(index.order_.begin(), index.order_.end(), 0u);
  if (n > 0) {
    index.nodes_.reserve(2 * (n / kLeafSize + 1));
    index.build_node(0, static_cast<std::uint32_t>(n), 0);
  }
  return index;
}

std::int32_t SpatialIndex::build_node(std::uint32_t begin, std::uint32_t end, int depth) {
  Node node;
  for (int k = 0; k < 3; ++k) {
    node.lo[k] = 2.0;
    node.hi[k] = -2.0;
  }
  for (std::uint32_t i = begin; i < end; ++i) {
    const double* v = &xyz_[3 * order_[i]];
    for (int k = 0; k < 3; ++k) {
      node.lo[k] = std::min(node.lo[k], v[k]);
      node.hi[k] = std::max(node.hi[k], v[k]);
    }
  }
  node.begin = begin;
  node.end = end;
  const auto self = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(node);

  if (end - begin <= kLeafSize || depth > 64) {
    return self;
  }
  int axis = 0;
  for (int k = 1; k < 3; ++k) {
    if (node.hi[k] - node.lo[k] > node.hi[axis] - node.lo[axis]) axis = k;
  }
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double va = xyz_[3 * a + axis];
                     const double vb = xyz_[3 * b + axis];
                     return va < vb || (va == vb && a < b);
                   });
  const std::int32_t left = build_node(begin, mid, depth + 1);
  const std::int32_t right = build_node(mid, end, depth + 1);
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

double SpatialIndex::lower_bound_miles(const Node& node, const double q[3]) const {
  double sq = 0.0;
  for (int k = 0; k < 3; ++k) {
    double d = 0.0;
    if (q[k] < node.lo[k]) {
      d = node.lo[k] - q[k];
    } else if (q[k] > node.hi[k]) {
      d = q[k] - node.hi[k];
    }
    sq += d * d;
  }
  const double chord = std::sqrt(sq);
  const double arc = 2.0 * kEarthRadiusMiles * std::asin(std::min(1.0, chord * 0.5));
  return arc * (1.0 - kBoundRelSlack) - kBoundAbsSlackMiles;
}

bool SpatialIndex::better(std::size_t a, double da, std::size_t b, double db) const {
  return da < db || (da == db && rank_[a] < rank_[b]);
}

std::optional<Neighbor> SpatialIndex::nearest(const GeoPoint& q) const {
  validate(q, "nearest query");
  if (nodes_.empty()) return std::nullopt;
  double qv[3];
  to_unit(q, qv);

  std::optional<Neighbor> best;
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (best && lower_bound_miles(node, qv) > best->miles) continue;
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t e = order_[i];
        const double d = haversine_miles(q, points_[e]);
        if (!best || better(e, d, best->index, best->miles)) best = Neighbor{e, d};
      }
      continue;
    }
    // Push the farther child first so the nearer one is explored first.
    const double lb_left = lower_bound_miles(nodes_[node.left], qv);
    const double lb_right = lower_bound_miles(nodes_[node.right], qv);
    if (lb_left <= lb_right) {
      stack.push_back(node.right);
      stack.push_back(node.left);
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  return best;
}

std::vector<Neighbor> SpatialIndex::within_radius(const GeoPoint& q, double radius_miles) const {
  validate(q, "within_radius query");
  if (!(radius_miles >= 0.0) || !std::isfinite(radius_miles)) {
    throw InvalidInput("within_radius: radius must be finite and >= 0");
  }
  std::vector<Neighbor> out;
  if (nodes_.empty()) return out;
  double qv[3];
  to_unit(q, qv);

  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (lower_bound_miles(node, qv) > radius_miles) continue;
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t e = order_[i];
        const double d = haversine_miles(q, points_[e]);
        if (d <= radius_miles) out.push_back(Neighbor{e, d});
      }
      continue;
    }
    stack.push_back(node.left);
    stack.push_back(node.right);
  }
  std::sort(out.begin(), out.end(), [&](const Neighbor& a, const Neighbor& b) {
    return better(a.index, a.miles, b.index, b.miles);
  });
  return out;
}

}  // namespace coveropt

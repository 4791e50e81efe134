#pragma once

// Random instance generators and brute-force oracles shared by the unit and
// acceptance tests. Oracles deliberately avoid the library's index and
// matrix code paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "coveropt/coveropt.hpp"

namespace coveropt::testing {

inline std::string zcta_id(std::size_t i) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%05zu", i % 100000);
  return buf;
}

// Points in a box around (lat0, lon0) with half-widths in degrees.
inline std::vector<GeoPoint> random_points(std::mt19937_64& rng, std::size_t n, double lat0,
                                           double lon0, double half_lat, double half_lon) {
  std::uniform_real_distribution<double> dlat(lat0 - half_lat, lat0 + half_lat);
  std::uniform_real_distribution<double> dlon(lon0 - half_lon, lon0 + half_lon);
  std::vector<GeoPoint> out(n);
  for (auto& p : out) p = {dlat(rng), dlon(rng)};
  return out;
}

inline std::vector<GeoPoint> random_globe(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> dlon(-180.0, 180.0);
  std::vector<GeoPoint> out(n);
  for (auto& p : out) p = {std::asin(u(rng)) * 180.0 / M_PI, dlon(rng)};
  return out;
}

inline std::vector<DemandPoint> make_demand(std::span<const GeoPoint> pts,
                                            std::span<const Persons> weights,
                                            const std::string& state = "CA") {
  std::vector<DemandPoint> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out.push_back({zcta_id(i), pts[i], weights[i], std::nullopt, state});
  }
  return out;
}

inline std::vector<DemandPoint> random_demand(std::mt19937_64& rng, std::size_t n, double lat0,
                                              double lon0, double half, Persons max_weight) {
  const auto pts = random_points(rng, n, lat0, lon0, half, half);
  std::uniform_int_distribution<Persons> w(0, max_weight);
  std::vector<Persons> weights(n);
  for (auto& x : weights) x = w(rng);
  return make_demand(pts, weights);
}

inline FacilitySite facility(std::string id, GeoPoint p, std::string state = "CA",
                             std::string zip = "90001", std::string name = "") {
  FacilitySite f;
  f.id = std::move(id);
  f.name = name.empty() ? "org " + f.id : std::move(name);
  f.point = p;
  f.state = std::move(state);
  f.zip = std::move(zip);
  f.sources.set(Source::directory);
  return f;
}

inline std::vector<FacilitySite> random_facilities(std::mt19937_64& rng, std::size_t n,
                                                   double lat0, double lon0, double half) {
  const auto pts = random_points(rng, n, lat0, lon0, half, half);
  std::vector<FacilitySite> out;
  for (std::size_t i = 0; i < n; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "F%05zu", i);
    out.push_back(facility(id, pts[i]));
  }
  return out;
}

// Nearest by linear scan, ties by smallest id.
inline std::optional<std::pair<std::size_t, double>> scan_nearest(
    std::span<const IndexEntry> entries, const GeoPoint& q) {
  std::optional<std::pair<std::size_t, double>> best;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const double d = haversine_miles(q, entries[i].point);
    if (!best || d < best->second ||
        (d == best->second && entries[i].id < entries[best->first].id)) {
      best = {i, d};
    }
  }
  return best;
}

// Entries within r by linear scan, sorted by (distance, id).
inline std::vector<Neighbor> scan_within(std::span<const IndexEntry> entries, const GeoPoint& q,
                                         double r) {
  std::vector<Neighbor> out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const double d = haversine_miles(q, entries[i].point);
    if (d <= r) out.push_back({i, d});
  }
  std::sort(out.begin(), out.end(), [&](const Neighbor& a, const Neighbor& b) {
    if (a.miles != b.miles) return a.miles < b.miles;
    return entries[a.index].id < entries[b.index].id;
  });
  return out;
}

// Expand integer weights into repeated values and read off the ceil(q*W)-th
// smallest (1-based), the left-continuous inverse ECDF.
inline double expansion_quantile(std::span<const double> values, std::span<const Persons> weights,
                                 double q) {
  std::vector<double> expanded;
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (Persons w = 0; w < weights[i]; ++w) expanded.push_back(values[i]);
  }
  std::sort(expanded.begin(), expanded.end());
  const auto total = static_cast<double>(expanded.size());
  std::size_t rank = static_cast<std::size_t>(std::ceil(q * total));
  // Guard against q*W landing a hair above an integer.
  if (rank > 0 && static_cast<double>(rank - 1) >= q * total) --rank;
  rank = std::clamp<std::size_t>(rank, 1, expanded.size());
  return expanded[rank - 1];
}

// Weight newly covered by `sites` (candidate points) over the uncovered
// baseline, by direct pairwise distances.
inline Persons pairwise_gain(std::span<const DemandPoint> demand,
                             std::span<const GeoPoint> sites, const CoveredMask& baseline,
                             double r) {
  Persons gain = 0;
  for (std::size_t d = 0; d < demand.size(); ++d) {
    if (baseline[d]) continue;
    for (const auto& s : sites) {
      if (haversine_miles(s, demand[d].centroid) <= r) {
        gain += demand[d].weight;
        break;
      }
    }
  }
  return gain;
}

// Per-site loads of a plan recomputed from pairwise distances.
inline std::vector<Persons> pairwise_loads(std::span<const DemandPoint> demand,
                                           std::span<const CandidateSite> sites, double r) {
  std::vector<Persons> loads(sites.size(), 0);
  for (const auto& d : demand) {
    std::optional<std::size_t> best;
    double best_d = 0.0;
    for (std::size_t s = 0; s < sites.size(); ++s) {
      const double m = haversine_miles(sites[s].point, d.centroid);
      if (m > r) continue;
      if (!best || m < best_d || (m == best_d && sites[s].id < sites[*best].id)) {
        best = s;
        best_d = m;
      }
    }
    if (best) loads[*best] += d.weight;
  }
  return loads;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("coveropt_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace coveropt::testing

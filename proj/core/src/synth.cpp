#include "coveropt/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "coveropt/random.hpp"

namespace coveropt {
namespace {

constexpr double kLatMin = 25.0, kLatMax = 49.0;
constexpr double kLonMin = -124.0, kLonMax = -67.0;
constexpr int kGridRows = 6, kGridCols = 8;
constexpr double kMilesPerDegree = 69.0932;

constexpr std::array<const char*, 48> kStates = {
    "AL", "AZ", "AR", "CA", "CO", "CT", "DE", "FL", "GA", "ID", "IL", "IN",
    "IA", "KS", "KY", "LA", "ME", "MD", "MA", "MI", "MN", "MS", "MO", "MT",
    "NE", "NV", "NH", "NJ", "NM", "NY", "NC", "ND", "OH", "OK", "OR", "PA",
    "RI", "SC", "SD", "TN", "TX", "UT", "VT", "VA", "WA", "WV", "WI", "WY"};

struct City {
  GeoPoint center;
  double size = 1.0;
  double spread_miles = 10.0;
};

double normal(Rng& rng) {
  // Box-Muller; u1 kept away from zero.
  const double u1 = 1.0 - rng.unit();
  const double u2 = rng.unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

GeoPoint uniform_point(Rng& rng) {
  return {kLatMin + (kLatMax - kLatMin) * rng.unit(), kLonMin + (kLonMax - kLonMin) * rng.unit()};
}

GeoPoint jitter(Rng& rng, const GeoPoint& c, double sd_miles) {
  const double dy = normal(rng) * sd_miles;
  const double dx = normal(rng) * sd_miles;
  GeoPoint p{c.lat + dy / kMilesPerDegree,
             c.lon + dx / (kMilesPerDegree * std::cos(c.lat * std::numbers::pi / 180.0))};
  p.lat = std::clamp(p.lat, kLatMin, kLatMax);
  p.lon = std::clamp(p.lon, kLonMin, kLonMax);
  return p;
}

std::string state_of(const GeoPoint& p) {
  const int row = std::clamp(static_cast<int>((p.lat - kLatMin) / (kLatMax - kLatMin) * kGridRows),
                             0, kGridRows - 1);
  const int col = std::clamp(static_cast<int>((p.lon - kLonMin) / (kLonMax - kLonMin) * kGridCols),
                             0, kGridCols - 1);
  return kStates[static_cast<std::size_t>(row * kGridCols + col)];
}

std::size_t pick(Rng& rng, const std::vector<double>& cumulative) {
  const double u = rng.unit() * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

std::string padded(const char* prefix, std::size_t n, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, n);
  return buf;
}

}  // namespace

SynthDataset synthesize(const SynthOptions& options) {
  if (options.demand_points > 99999) throw InvalidInput("synthesize: at most 99999 demand points");
  if (options.cities == 0) throw InvalidInput("synthesize: need at least one city");
  Rng rng(mix_seed(options.seed, 0x5717));
  SynthDataset out;

  std::vector<City> cities(options.cities);
  std::vector<double> cumulative;
  double acc = 0.0;
  for (auto& city : cities) {
    city.center = {kLatMin + 1.0 + (kLatMax - kLatMin - 2.0) * rng.unit(),
                   kLonMin + 1.5 + (kLonMax - kLonMin - 3.0) * rng.unit()};
    // Pareto(alpha = 1.1) city sizes, capped.
    city.size = std::min(200.0, std::pow(1.0 - rng.unit(), -1.0 / 1.1));
    city.spread_miles = 6.0 + 4.0 * std::log1p(city.size);
    acc += city.size;
    cumulative.push_back(acc);
  }

  out.demand.reserve(options.demand_points);
  for (std::size_t i = 0; i < options.demand_points; ++i) {
    DemandPoint d;
    d.zcta = padded("", i + 1, 5);
    if (rng.unit() < options.urban_share) {
      const City& city = cities[pick(rng, cumulative)];
      d.centroid = jitter(rng, city.center, city.spread_miles);
      d.weight = static_cast<Persons>(std::floor(std::exp(std::log(400.0) + 0.9 * normal(rng))));
    } else {
      d.centroid = uniform_point(rng);
      d.weight = rng.unit() < 0.1
                     ? 0
                     : static_cast<Persons>(std::floor(std::exp(std::log(30.0) + 1.1 * normal(rng))));
    }
    d.state = state_of(d.centroid);
    out.demand.push_back(std::move(d));
  }

  // Fragments: every point belongs to its state; points near a city belong to
  // that city's cbsa, split with a second city when two are in range.
  for (const auto& d : out.demand) {
    out.fragments.push_back({d.zcta, RegionKind::state, d.state, static_cast<double>(d.weight)});
    std::size_t first = cities.size(), second = cities.size();
    double d1 = 0.0, d2 = 0.0;
    for (std::size_t c = 0; c < cities.size(); ++c) {
      const double miles = haversine_miles(d.centroid, cities[c].center);
      if (miles > 3.0 * cities[c].spread_miles) continue;
      if (first == cities.size() || miles < d1) {
        second = first;
        d2 = d1;
        first = c;
        d1 = miles;
      } else if (second == cities.size() || miles < d2) {
        second = c;
        d2 = miles;
      }
    }
    if (first == cities.size()) continue;
    const double w = static_cast<double>(d.weight);
    if (second == cities.size()) {
      out.fragments.push_back({d.zcta, RegionKind::cbsa, padded("C", first + 1, 3), w});
    } else {
      out.fragments.push_back({d.zcta, RegionKind::cbsa, padded("C", first + 1, 3), 0.7 * w});
      out.fragments.push_back({d.zcta, RegionKind::cbsa, padded("C", second + 1, 3), 0.3 * w});
    }
  }

  const SpatialIndex zips = [&] {
    std::vector<IndexEntry> entries;
    entries.reserve(out.demand.size());
    for (const auto& d : out.demand) entries.push_back({d.zcta, d.centroid});
    return SpatialIndex::build(entries);
  }();

  auto make_site = [&](std::string id, std::string name, const GeoPoint& p) {
    FacilitySite s;
    s.id = std::move(id);
    s.name = std::move(name);
    s.point = p;
    s.state = state_of(p);
    if (auto nb = zips.nearest(p)) {
      s.zip = zips.id(nb->index);
    } else {
      s.zip = "00000";
    }
    if (rng.unit() < 0.5) s.sources.set(Source::directory);
    if (rng.unit() < 0.55) s.sources.set(Source::doj_roster);
    if (rng.unit() < 0.9) s.sources.set(Source::referral_db);
    if (!s.sources.any()) s.sources.set(Source::manual);
    s.doj_recognized = s.sources.has(Source::doj_roster);
    return s;
  };

  for (std::size_t i = 0; i < options.facilities; ++i) {
    GeoPoint p;
    if (rng.unit() < options.colocated_share) {
      const City& city = cities[pick(rng, cumulative)];
      p = jitter(rng, city.center, 0.6 * city.spread_miles);
    } else {
      p = uniform_point(rng);
    }
    out.facilities.push_back(
        make_site(padded("F", i + 1, 5), "Legal Aid Office " + std::to_string(i + 1), p));
  }
  const auto extra = static_cast<std::size_t>(
      std::floor(options.duplicate_share * static_cast<double>(options.facilities)));
  for (std::size_t i = 0; i < extra && !out.facilities.empty(); ++i) {
    const FacilitySite& base = out.facilities[static_cast<std::size_t>(rng.below(options.facilities))];
    GeoPoint p = base.point;
    p.lat = std::clamp(p.lat + 0.005 / kMilesPerDegree, -90.0, 90.0);
    auto dup = make_site(padded("G", i + 1, 5), base.name, p);
    out.facilities.push_back(std::move(dup));
  }
  return out;
}

}  // namespace coveropt

#include "coveropt/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "coveropt/parallel.hpp"

namespace coveropt {
namespace {

void require_radius(double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidInput("radius must be finite and > 0");
}

}  // namespace

SpatialIndex index_facilities(std::span<const FacilitySite> facilities) {
  std::vector<IndexEntry> entries;
  entries.reserve(facilities.size());
  for (const auto& f : facilities) entries.push_back({f.id, f.point});
  return SpatialIndex::build(entries);
}

SpatialIndex index_demand(std::span<const DemandPoint> demand) {
  std::vector<IndexEntry> entries;
  entries.reserve(demand.size());
  for (const auto& d : demand) entries.push_back({d.zcta, d.centroid});
  return SpatialIndex::build(entries);
}

CoverageField compute_field(std::span<const DemandPoint> demand,
                            std::span<const FacilitySite> facilities, double radius_miles) {
  return compute_field(demand, index_facilities(facilities), radius_miles);
}

CoverageField compute_field(std::span<const DemandPoint> demand, const SpatialIndex& facilities,
                            double radius_miles) {
  require_radius(radius_miles);
  CoverageField field;
  field.radius_miles = radius_miles;
  field.records.resize(demand.size());
  parallel_for(demand.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      FieldRecord& rec = field.records[i];
      rec.zcta = demand[i].zcta;
      if (auto nb = facilities.nearest(demand[i].centroid)) {
        rec.facility_id = facilities.id(nb->index);
        rec.distance_miles = nb->miles;
        rec.covered = nb->miles <= radius_miles;
      }
    }
  });
  return field;
}

WeightedQuantiles::WeightedQuantiles(std::span<const double> values,
                                     std::span<const double> weights) {
  if (values.size() != weights.size()) {
    throw InvalidInput("weighted_quantile: values and weights differ in length");
  }
  std::vector<std::size_t> order;
  order.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(weights[i]) || weights[i] < 0.0) {
      throw InvalidInput("weighted_quantile: weights must be finite and >= 0");
    }
    if (!std::isfinite(values[i])) throw InvalidInput("weighted_quantile: non-finite value");
    if (weights[i] > 0.0) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  values_.reserve(order.size());
  cumulative_.reserve(order.size());
  double running = 0.0;
  for (std::size_t i : order) {
    running += weights[i];
    values_.push_back(values[i]);
    cumulative_.push_back(running);
  }
  total_ = running;
  if (!(total_ > 0.0)) throw InvalidInput("weighted_quantile: total weight is zero");
}

double WeightedQuantiles::operator()(double q) const {
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidInput("weighted_quantile: q must lie in [0, 1]");
  const auto it = std::partition_point(cumulative_.begin(), cumulative_.end(),
                                       [&](double c) { return c / total_ < q; });
  return values_[static_cast<std::size_t>(it - cumulative_.begin())];
}

double weighted_quantile(std::span<const double> values, std::span<const double> weights,
                         double q) {
  return WeightedQuantiles(values, weights)(q);
}

CoverageSplit classify(const CoverageField& field, std::span<const DemandPoint> demand) {
  if (field.records.size() != demand.size()) {
    throw InvalidInput("classify: field and demand differ in length");
  }
  CoverageSplit split;
  for (std::size_t i = 0; i < demand.size(); ++i) {
    if (field.records[i].covered) {
      split.covered += demand[i].weight;
    } else {
      split.underserved += demand[i].weight;
    }
  }
  return split;
}

std::vector<RegionStats> aggregate(const CoverageField& field, std::span<const DemandPoint> demand,
                                   const RegionMap& regions,
                                   std::span<const FacilitySite> facilities,
                                   FacilityAttribution attribution) {
  if (field.records.size() != demand.size()) {
    throw InvalidInput("aggregate: field and demand differ in length");
  }
  struct Acc {
    RegionStats stats;
    double weighted_sum = 0.0;
    double weight = 0.0;
  };
  std::map<std::string, Acc> acc;
  for (std::size_t i = 0; i < demand.size(); ++i) {
    const auto it = regions.find(demand[i].zcta);
    if (it == regions.end()) continue;
    Acc& a = acc[it->second];
    const Persons w = demand[i].weight;
    a.stats.population += w;
    const FieldRecord& rec = field.records[i];
    if (rec.covered) {
      a.stats.covered_population += w;
    } else {
      a.stats.underserved_population += w;
    }
    if (rec.distance_miles && w > 0) {
      a.weighted_sum += static_cast<double>(w) * *rec.distance_miles;
      a.weight += static_cast<double>(w);
    }
  }
  for (const auto& f : facilities) {
    if (attribution == FacilityAttribution::by_state) {
      ++acc[f.state].stats.facility_count;
    } else if (const auto it = regions.find(f.zip); it != regions.end()) {
      ++acc[it->second].stats.facility_count;
    }
  }
  std::vector<RegionStats> out;
  out.reserve(acc.size());
  for (auto& [id, a] : acc) {
    a.stats.region_id = id;
    if (a.weight > 0.0) a.stats.weighted_mean_distance = a.weighted_sum / a.weight;
    out.push_back(std::move(a.stats));
  }
  return out;
}

double type7_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw InvalidInput("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("quantile probability must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

UnderservedRegions find_underserved(std::span<const RegionStats> stats) {
  std::vector<double> distances;
  std::vector<double> populations;
  for (const auto& s : stats) {
    if (!s.weighted_mean_distance) continue;
    distances.push_back(*s.weighted_mean_distance);
    populations.push_back(static_cast<double>(s.population));
  }
  if (distances.size() < 4) {
    throw InvalidInput("find_underserved: need at least 4 regions with a mean distance, got " +
                       std::to_string(distances.size()));
  }
  UnderservedRegions out;
  out.distance_threshold = type7_quantile(distances, 0.75);
  out.population_threshold = type7_quantile(populations, 0.75);
  for (const auto& s : stats) {
    if (!s.weighted_mean_distance) continue;
    if (*s.weighted_mean_distance > out.distance_threshold &&
        static_cast<double>(s.population) > out.population_threshold) {
      out.region_ids.push_back(s.region_id);
    }
  }
  return out;
}

double correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInput("correlation: series differ in length");
  if (x.size() < 2) throw InvalidInput("correlation: need at least 2 values");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw InvalidInput("correlation: constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CoverageMatrix CoverageMatrix::build(std::span<const DemandPoint> demand,
                                     std::span<const CandidateSite> candidates,
                                     double radius_miles) {
  require_radius(radius_miles);
  CoverageMatrix m;
  m.radius_ = radius_miles;
  m.candidates_.assign(candidates.begin(), candidates.end());
  const std::size_t nc = candidates.size();

  m.by_id_.resize(nc);
  std::iota(m.by_id_.begin(), m.by_id_.end(), 0u);
  std::sort(m.by_id_.begin(), m.by_id_.end(), [&](std::uint32_t a, std::uint32_t b) {
    return m.candidates_[a].id < m.candidates_[b].id;
  });
  m.rank_.resize(nc);
  for (std::size_t r = 0; r < nc; ++r) {
    if (r > 0 && m.candidates_[m.by_id_[r]].id == m.candidates_[m.by_id_[r - 1]].id) {
      throw InvalidInput("duplicate candidate id '" + m.candidates_[m.by_id_[r]].id + "'");
    }
    m.rank_[m.by_id_[r]] = static_cast<std::uint32_t>(r);
  }

  m.demand_weight_.reserve(demand.size());
  for (const auto& d : demand) m.demand_weight_.push_back(d.weight);

  const SpatialIndex index = index_demand(demand);
  std::vector<std::vector<Neighbor>> rows(nc);
  parallel_for(nc, [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      rows[c] = index.within_radius(candidates[c].point, radius_miles);
      std::sort(rows[c].begin(), rows[c].end(),
                [](const Neighbor& a, const Neighbor& b) { return a.index < b.index; });
    }
  }, 16);

  m.offsets_.resize(nc + 1, 0);
  for (std::size_t c = 0; c < nc; ++c) m.offsets_[c + 1] = m.offsets_[c] + rows[c].size();
  m.entries_.resize(m.offsets_[nc]);
  m.miles_.resize(m.offsets_[nc]);
  m.covered_weight_.assign(nc, 0);
  for (std::size_t c = 0; c < nc; ++c) {
    std::size_t k = m.offsets_[c];
    for (const auto& nb : rows[c]) {
      m.entries_[k] = static_cast<std::uint32_t>(nb.index);
      m.miles_[k] = nb.miles;
      m.covered_weight_[c] += m.demand_weight_[nb.index];
      ++k;
    }
    std::vector<Neighbor>().swap(rows[c]);
  }
  return m;
}

CoverageMatrix CoverageMatrix::over_demand(std::span<const DemandPoint> demand,
                                           double radius_miles) {
  std::vector<CandidateSite> candidates;
  candidates.reserve(demand.size());
  for (std::size_t i = 0; i < demand.size(); ++i) {
    candidates.push_back({demand[i].zcta, demand[i].centroid, demand[i].state, i});
  }
  return build(demand, candidates, radius_miles);
}

std::optional<std::size_t> CoverageMatrix::find(std::string_view id) const {
  const auto it = std::lower_bound(
      by_id_.begin(), by_id_.end(), id,
      [&](std::uint32_t c, std::string_view key) { return candidates_[c].id < key; });
  if (it == by_id_.end() || candidates_[*it].id != id) return std::nullopt;
  return *it;
}

std::vector<std::uint8_t> covered_mask(const CoverageField& field) {
  std::vector<std::uint8_t> mask(field.records.size(), 0);
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = field.records[i].covered ? 1 : 0;
  return mask;
}

}  // namespace coveropt

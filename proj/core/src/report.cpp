#include "coveropt/report.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "coveropt/csv.hpp"

namespace coveropt {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::string_view kFieldHeader[] = {"zcta", "nearest_facility_id", "distance_miles",
                                             "covered", "radius_miles"};

std::string opt_double(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

}  // namespace

std::vector<ComparisonRow> compare_networks(std::span<const std::string> current_site_regions,
                                            std::span<const std::string> optimal_site_regions) {
  std::map<std::string, ComparisonRow> rows;
  for (const auto& r : current_site_regions) ++rows[r].current_count;
  for (const auto& r : optimal_site_regions) ++rows[r].optimal_count;
  std::vector<ComparisonRow> out;
  out.reserve(rows.size());
  for (auto& [id, row] : rows) {
    row.region_id = id;
    row.delta = static_cast<long long>(row.optimal_count) - static_cast<long long>(row.current_count);
    out.push_back(row);
  }
  std::stable_sort(out.begin(), out.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
    return std::llabs(a.delta) > std::llabs(b.delta);
  });
  return out;
}

std::vector<std::string> facility_regions(std::span<const FacilitySite> facilities,
                                          const RegionMap& regions,
                                          FacilityAttribution attribution) {
  std::vector<std::string> out;
  out.reserve(facilities.size());
  for (const auto& f : facilities) {
    if (attribution == FacilityAttribution::by_state) {
      out.push_back(f.state);
    } else if (const auto it = regions.find(f.zip); it != regions.end()) {
      out.push_back(it->second);
    } else {
      out.emplace_back();
    }
  }
  return out;
}

std::vector<std::string> plan_regions(const NetworkPlan& plan, const CoverageMatrix& matrix,
                                      std::span<const DemandPoint> demand,
                                      const RegionMap& regions) {
  std::vector<std::string> out;
  out.reserve(plan.sites.size());
  for (std::size_t c : plan.sites) {
    const auto& site = matrix.candidate(c);
    std::string region;
    if (site.demand_index) {
      if (const auto it = regions.find(demand[*site.demand_index].zcta); it != regions.end()) {
        region = it->second;
      }
    }
    out.push_back(std::move(region));
  }
  return out;
}

std::vector<GainsRow> gains_by_state(std::span<const StateResult> add_one,
                                     std::span<const StateResult> rearranged) {
  std::map<std::string, GainsRow> rows;
  for (const auto& r : add_one) {
    auto& row = rows[r.state];
    row.currently_covered = r.currently_covered;
    row.gain_add_one = r.gain;
  }
  for (const auto& r : rearranged) {
    auto [it, fresh] = rows.try_emplace(r.state);
    if (fresh) it->second.currently_covered = r.currently_covered;
    it->second.gain_rearrange = r.gain;
  }
  std::vector<GainsRow> out;
  for (auto& [state, row] : rows) {
    row.region_id = state;
    out.push_back(row);
  }
  return out;
}

std::vector<QuantilePoint> quantile_curve(const CoverageField& field,
                                          std::span<const DemandPoint> demand,
                                          std::span<const double> grid) {
  if (field.records.size() != demand.size()) {
    throw InvalidInput("quantile_curve: field and demand differ in length");
  }
  std::vector<double> values;
  std::vector<double> weights;
  for (std::size_t i = 0; i < demand.size(); ++i) {
    if (!field.records[i].distance_miles) continue;
    values.push_back(*field.records[i].distance_miles);
    weights.push_back(static_cast<double>(demand[i].weight));
  }
  const WeightedQuantiles quantiles(values, weights);
  std::vector<QuantilePoint> out;
  out.reserve(grid.size());
  for (double q : grid) out.push_back({q, quantiles(q)});
  return out;
}

std::vector<double> percentile_grid(std::size_t n) {
  std::vector<double> grid;
  for (std::size_t i = 1; i < n; ++i) grid.push_back(static_cast<double>(i) / static_cast<double>(n));
  return grid;
}

Table field_table(const CoverageField& field) {
  Table t{{std::begin(kFieldHeader), std::end(kFieldHeader)}, {}};
  const std::string radius = format_double(field.radius_miles);
  for (const auto& r : field.records) {
    t.rows.push_back({r.zcta, r.facility_id.value_or(""), opt_double(r.distance_miles),
                      r.covered ? "1" : "0", radius});
  }
  return t;
}

CoverageField ingest_field(std::istream& in) {
  CsvReader reader(in);
  expect_header(reader, kFieldHeader);
  CoverageField field;
  bool radius_seen = false;
  std::vector<std::string> f;
  for (std::size_t row = 1; reader.next(f); ++row) {
    if (f.size() != std::size(kFieldHeader)) throw SchemaError(row, "", "wrong field count");
    FieldRecord rec;
    rec.zcta = f[0];
    if (!f[1].empty()) rec.facility_id = f[1];
    if (!f[2].empty()) rec.distance_miles = parse_double(f[2], row, "distance_miles");
    rec.covered = parse_flag(f[3], row, "covered");
    const double radius = parse_double(f[4], row, "radius_miles");
    if (radius_seen && radius != field.radius_miles) {
      throw SchemaError(row, "radius_miles", "radius differs between rows");
    }
    field.radius_miles = radius;
    radius_seen = true;
    if (rec.covered != (rec.distance_miles && *rec.distance_miles <= radius)) {
      throw SchemaError(row, "covered", "flag disagrees with distance and radius");
    }
    field.records.push_back(std::move(rec));
  }
  return field;
}

Table region_stats_table(std::span<const RegionStats> stats) {
  Table t{{"region_id", "population", "weighted_mean_distance", "facility_count",
           "covered_population", "underserved_population"},
          {}};
  for (const auto& s : stats) {
    t.rows.push_back({s.region_id, std::to_string(s.population),
                      opt_double(s.weighted_mean_distance), std::to_string(s.facility_count),
                      std::to_string(s.covered_population),
                      std::to_string(s.underserved_population)});
  }
  return t;
}

Table comparison_table(std::span<const ComparisonRow> rows) {
  Table t{{"region_id", "current", "optimal", "delta"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({r.region_id, std::to_string(r.current_count),
                      std::to_string(r.optimal_count), std::to_string(r.delta)});
  }
  return t;
}

Table gains_table(std::span<const GainsRow> rows) {
  Table t{{"region_id", "covered", "gain_add_one", "gain_rearrange"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({r.region_id, std::to_string(r.currently_covered),
                      std::to_string(r.gain_add_one), std::to_string(r.gain_rearrange)});
  }
  return t;
}

Table quantile_table(std::span<const QuantilePoint> curve) {
  Table t{{"q", "miles"}, {}};
  for (const auto& p : curve) t.rows.push_back({format_double(p.q), format_double(p.miles)});
  return t;
}

Table greedy_table(std::span<const Placement> placements, const CoverageMatrix& matrix) {
  Table t{{"rank", "zcta", "lat", "lon", "marginal_gain"}, {}};
  std::size_t rank = 1;
  for (const auto& p : placements) {
    const auto& site = matrix.candidate(p.candidate);
    t.rows.push_back({std::to_string(rank++), site.id, format_double(site.point.lat),
                      format_double(site.point.lon), std::to_string(p.marginal_gain)});
  }
  return t;
}

Table plan_table(const NetworkPlan& plan, const CoverageMatrix& matrix) {
  Table t{{"zcta", "load"}, {}};
  for (std::size_t i = 0; i < plan.sites.size(); ++i) {
    t.rows.push_back({matrix.candidate(plan.sites[i]).id, std::to_string(plan.loads[i])});
  }
  return t;
}

std::string to_csv(const Table& table) {
  std::ostringstream out;
  write_csv_row(out, table.header);
  for (const auto& row : table.rows) write_csv_row(out, row);
  return out.str();
}

void emit_text(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

void emit_csv(const Table& table, const std::filesystem::path& path) {
  emit_text(to_csv(table), path);
}

std::string_view to_string(SiteRole role) {
  switch (role) {
    case SiteRole::existing: return "existing";
    case SiteRole::added: return "added";
    case SiteRole::rearranged: return "rearranged";
  }
  return "unknown";
}

std::string field_geojson(const CoverageField& field, std::span<const DemandPoint> demand) {
  if (field.records.size() != demand.size()) {
    throw InvalidInput("field_geojson: field and demand differ in length");
  }
  ordered_json features = ordered_json::array();
  for (std::size_t i = 0; i < demand.size(); ++i) {
    const auto& rec = field.records[i];
    ordered_json props;
    props["zcta"] = rec.zcta;
    props["distance"] = rec.distance_miles ? ordered_json(*rec.distance_miles) : ordered_json(nullptr);
    props["covered"] = rec.covered;
    props["weight"] = demand[i].weight;
    features.push_back({{"type", "Feature"},
                        {"geometry",
                         {{"type", "Point"},
                          {"coordinates", {demand[i].centroid.lon, demand[i].centroid.lat}}}},
                        {"properties", std::move(props)}});
  }
  ordered_json doc{{"type", "FeatureCollection"}, {"features", std::move(features)}};
  return doc.dump() + "\n";
}

std::string sites_geojson(std::span<const SiteFeature> sites) {
  ordered_json features = ordered_json::array();
  for (const auto& s : sites) {
    features.push_back(
        {{"type", "Feature"},
         {"geometry", {{"type", "Point"}, {"coordinates", {s.point.lon, s.point.lat}}}},
         {"properties", {{"id", s.id}, {"role", std::string(to_string(s.role))}}}});
  }
  ordered_json doc{{"type", "FeatureCollection"}, {"features", std::move(features)}};
  return doc.dump() + "\n";
}

}  // namespace coveropt

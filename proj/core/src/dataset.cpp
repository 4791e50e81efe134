#include "coveropt/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <unordered_map>

namespace coveropt {
namespace {

constexpr std::string_view kFacilityHeader[] = {
    "id",     "name",         "lat",        "lon",          "state",         "zip",
    "src_directory", "src_doj", "src_referral", "src_manual", "doj_recognized"};
constexpr std::string_view kDemandHeader[] = {"zcta", "lat", "lon", "weight", "state"};
constexpr std::string_view kFragmentHeader[] = {"zcta", "region_kind", "region_id", "population"};

void require_width(const std::vector<std::string>& fields, std::size_t width, std::size_t row) {
  if (fields.size() != width) {
    throw SchemaError(row, "", "expected " + std::to_string(width) + " fields, got " +
                                   std::to_string(fields.size()));
  }
}

GeoPoint parse_point(const std::string& lat, const std::string& lon, std::size_t row) {
  GeoPoint p{parse_double(lat, row, "lat"), parse_double(lon, row, "lon")};
  if (p.lat < -90.0 || p.lat > 90.0) throw SchemaError(row, "lat", "latitude out of range: " + lat);
  if (p.lon < -180.0 || p.lon > 180.0) {
    throw SchemaError(row, "lon", "longitude out of range: " + lon);
  }
  return p;
}

std::string flag(bool b) { return b ? "1" : "0"; }

// Union-find with path halving.
struct Components {
  explicit Components(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void join(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::size_t> parent;
};

}  // namespace

std::string_view to_string(RegionKind kind) {
  switch (kind) {
    case RegionKind::cbsa: return "cbsa";
    case RegionKind::county: return "county";
    case RegionKind::commuting_zone: return "commuting_zone";
    case RegionKind::state: return "state";
    case RegionKind::nation: return "nation";
  }
  return "unknown";
}

RegionKind parse_region_kind(std::string_view name) {
  for (auto k : {RegionKind::cbsa, RegionKind::county, RegionKind::commuting_zone,
                 RegionKind::state, RegionKind::nation}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidInput("unknown region kind '" + std::string(name) + "'");
}

bool is_state_code(std::string_view s) {
  return s.size() == 2 && std::isupper(static_cast<unsigned char>(s[0])) &&
         std::isupper(static_cast<unsigned char>(s[1]));
}

bool is_five_digits(std::string_view s) {
  return s.size() == 5 &&
         std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::vector<FacilitySite> ingest_facilities(std::istream& in) {
  CsvReader reader(in);
  expect_header(reader, kFacilityHeader);
  std::vector<FacilitySite> out;
  std::set<std::string> seen;
  std::vector<std::string> f;
  for (std::size_t row = 1; reader.next(f); ++row) {
    require_width(f, std::size(kFacilityHeader), row);
    FacilitySite site;
    site.id = f[0];
    if (site.id.empty()) throw SchemaError(row, "id", "empty id");
    if (!seen.insert(site.id).second) throw SchemaError(row, "id", "duplicate id '" + site.id + "'");
    site.name = f[1];
    site.point = parse_point(f[2], f[3], row);
    site.state = f[4];
    if (!is_state_code(site.state)) throw SchemaError(row, "state", "not a 2-letter code: " + f[4]);
    site.zip = f[5];
    if (!is_five_digits(site.zip)) throw SchemaError(row, "zip", "not a 5-digit zip: " + f[5]);
    if (parse_flag(f[6], row, "src_directory")) site.sources.set(Source::directory);
    if (parse_flag(f[7], row, "src_doj")) site.sources.set(Source::doj_roster);
    if (parse_flag(f[8], row, "src_referral")) site.sources.set(Source::referral_db);
    if (parse_flag(f[9], row, "src_manual")) site.sources.set(Source::manual);
    if (!site.sources.any()) throw SchemaError(row, "src_*", "no source flag set");
    site.doj_recognized = parse_flag(f[10], row, "doj_recognized");
    out.push_back(std::move(site));
  }
  return out;
}

std::vector<DemandPoint> ingest_demand(std::istream& in) {
  CsvReader reader(in);
  expect_header(reader, kDemandHeader);
  std::vector<DemandPoint> out;
  std::set<std::string> seen;
  std::vector<std::string> f;
  for (std::size_t row = 1; reader.next(f); ++row) {
    require_width(f, std::size(kDemandHeader), row);
    DemandPoint p;
    p.zcta = f[0];
    if (!is_five_digits(p.zcta)) throw SchemaError(row, "zcta", "not a 5-digit zcta: " + f[0]);
    if (!seen.insert(p.zcta).second) throw SchemaError(row, "zcta", "duplicate zcta " + p.zcta);
    p.centroid = parse_point(f[1], f[2], row);
    p.weight = parse_int(f[3], row, "weight");
    if (p.weight < 0) throw SchemaError(row, "weight", "negative weight " + f[3]);
    p.state = f[4];
    if (!is_state_code(p.state)) throw SchemaError(row, "state", "not a 2-letter code: " + f[4]);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<ZctaFragment> ingest_fragments(std::istream& in) {
  CsvReader reader(in);
  expect_header(reader, kFragmentHeader);
  std::vector<ZctaFragment> out;
  std::vector<std::string> f;
  for (std::size_t row = 1; reader.next(f); ++row) {
    require_width(f, std::size(kFragmentHeader), row);
    ZctaFragment frag;
    frag.zcta = f[0];
    if (!is_five_digits(frag.zcta)) throw SchemaError(row, "zcta", "not a 5-digit zcta: " + f[0]);
    try {
      frag.kind = parse_region_kind(f[1]);
    } catch (const InvalidInput& e) {
      throw SchemaError(row, "region_kind", e.what());
    }
    frag.region_id = f[2];
    if (frag.region_id.empty()) throw SchemaError(row, "region_id", "empty region id");
    frag.population = parse_double(f[3], row, "population");
    if (frag.population < 0.0) throw SchemaError(row, "population", "negative population " + f[3]);
    out.push_back(std::move(frag));
  }
  return out;
}

void emit_facilities(std::ostream& out, std::span<const FacilitySite> sites) {
  write_csv_row(out, std::vector<std::string>(std::begin(kFacilityHeader), std::end(kFacilityHeader)));
  for (const auto& s : sites) {
    write_csv_row(out, std::vector<std::string>{
                           s.id, s.name, format_double(s.point.lat), format_double(s.point.lon),
                           s.state, s.zip, flag(s.sources.has(Source::directory)),
                           flag(s.sources.has(Source::doj_roster)),
                           flag(s.sources.has(Source::referral_db)),
                           flag(s.sources.has(Source::manual)), flag(s.doj_recognized)});
  }
}

void emit_demand(std::ostream& out, std::span<const DemandPoint> demand) {
  write_csv_row(out, std::vector<std::string>(std::begin(kDemandHeader), std::end(kDemandHeader)));
  for (const auto& d : demand) {
    write_csv_row(out, std::vector<std::string>{d.zcta, format_double(d.centroid.lat),
                                                format_double(d.centroid.lon),
                                                std::to_string(d.weight), d.state});
  }
}

void emit_fragments(std::ostream& out, std::span<const ZctaFragment> fragments) {
  write_csv_row(out,
                std::vector<std::string>(std::begin(kFragmentHeader), std::end(kFragmentHeader)));
  for (const auto& f : fragments) {
    write_csv_row(out, std::vector<std::string>{f.zcta, std::string(to_string(f.kind)),
                                                f.region_id, format_double(f.population)});
  }
}

std::string normalize_name(std::string_view name) {
  std::string out;
  bool pending_space = false;
  for (char raw : name) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isalnum(c)) {
      if (pending_space && !out.empty()) out += ' ';
      pending_space = false;
      out += static_cast<char>(std::tolower(c));
    } else if (std::isspace(c)) {
      pending_space = true;
    }
  }
  return out;
}

std::vector<FacilitySite> dedupe_by_location(std::span<const FacilitySite> sites, double eps) {
  if (!(eps >= 0.0)) throw InvalidInput("dedupe_by_location: eps must be >= 0");
  const std::size_t n = sites.size();

  std::map<std::string, std::vector<std::size_t>> by_name;
  for (std::size_t i = 0; i < n; ++i) by_name[normalize_name(sites[i].name)].push_back(i);

  Components comp(n);
  for (const auto& [name, members] : by_name) {
    if (members.size() < 2) continue;
    if (members.size() <= 256) {
      for (std::size_t a = 0; a < members.size(); ++a) {
        for (std::size_t b = a + 1; b < members.size(); ++b) {
          if (haversine_miles(sites[members[a]].point, sites[members[b]].point) <= eps) {
            comp.join(members[a], members[b]);
          }
        }
      }
      continue;
    }
    std::vector<IndexEntry> entries;
    entries.reserve(members.size());
    for (std::size_t m : members) entries.push_back({std::to_string(m), sites[m].point});
    const auto index = SpatialIndex::build(entries);
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (const auto& nb : index.within_radius(sites[members[a]].point, eps)) {
        comp.join(members[a], members[nb.index]);
      }
    }
  }

  // Roots are the smallest member position, so iterating roots in order gives
  // first-appearance order.
  std::map<std::size_t, std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < n; ++i) clusters[comp.find(i)].push_back(i);

  std::vector<FacilitySite> out;
  out.reserve(clusters.size());
  for (const auto& [root, members] : clusters) {
    if (members.size() == 1) {
      out.push_back(sites[root]);
      continue;
    }
    double mean_lat = 0.0;
    double mean_lon = 0.0;
    std::size_t id_owner = members.front();
    SourceFlags sources;
    bool doj = false;
    for (std::size_t m : members) {
      mean_lat += sites[m].point.lat;
      mean_lon += sites[m].point.lon;
      if (sites[m].id < sites[id_owner].id) id_owner = m;
      sources |= sites[m].sources;
      doj = doj || sites[m].doj_recognized;
    }
    const GeoPoint centroid{mean_lat / static_cast<double>(members.size()),
                            mean_lon / static_cast<double>(members.size())};
    std::size_t central = members.front();
    double best = haversine_miles(centroid, sites[central].point);
    for (std::size_t m : members) {
      const double d = haversine_miles(centroid, sites[m].point);
      if (d < best || (d == best && sites[m].id < sites[central].id)) {
        best = d;
        central = m;
      }
    }
    FacilitySite merged = sites[id_owner];
    merged.point = sites[central].point;
    merged.state = sites[central].state;
    merged.zip = sites[central].zip;
    merged.sources = sources;
    merged.doj_recognized = doj;
    out.push_back(std::move(merged));
  }
  return out;
}

RegionMap assign_region(std::span<const ZctaFragment> fragments, RegionKind kind) {
  std::map<std::string, std::map<std::string, double>> shares;
  for (const auto& f : fragments) {
    if (f.kind == kind) shares[f.zcta][f.region_id] += f.population;
  }
  RegionMap out;
  for (const auto& [zcta, regions] : shares) {
    // std::map iterates region ids ascending, so strict '>' keeps the
    // smallest id on ties.
    const std::string* best_id = nullptr;
    double best_pop = -1.0;
    for (const auto& [region, pop] : regions) {
      if (pop > best_pop) {
        best_pop = pop;
        best_id = &region;
      }
    }
    out.emplace(zcta, *best_id);
  }
  return out;
}

RegionMap state_regions(std::span<const DemandPoint> demand) {
  RegionMap out;
  for (const auto& d : demand) out.emplace(d.zcta, d.state);
  return out;
}

Persons total_weight(std::span<const DemandPoint> demand) {
  Persons total = 0;
  for (const auto& d : demand) total += d.weight;
  return total;
}

}  // namespace coveropt

#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "coveropt/coveropt.hpp"
#include "run_config.hpp"

namespace coveropt::cli {
namespace {

namespace fs = std::filesystem;

struct Inputs {
  std::vector<FacilitySite> facilities;
  std::vector<DemandPoint> demand;
  std::vector<ZctaFragment> fragments;
};

void require_path(const fs::path& p, const char* flag) {
  if (p.empty()) throw UsageError(std::string(flag) + " is required");
}

Inputs load(const RunConfig& c, bool facilities, bool demand) {
  Inputs in;
  if (facilities) {
    require_path(c.in_facilities, "--in-facilities");
    in.facilities = read_facilities_file(c.in_facilities);
  }
  if (demand) {
    require_path(c.in_demand, "--in-demand");
    in.demand = read_demand_file(c.in_demand);
  }
  if (!c.in_fragments.empty()) in.fragments = read_fragments_file(c.in_fragments);
  return in;
}

fs::path out_path(const RunConfig& c, const char* name) {
  std::error_code ec;
  fs::create_directories(c.out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + c.out_dir.string() + "'");
  return c.out_dir / name;
}

// zcta -> region for the configured kind; state regions come from the demand
// file itself, other kinds need a fragment table.
RegionMap region_map(const RunConfig& c, const Inputs& in) {
  if (c.region_kind == RegionKind::state) return state_regions(in.demand);
  if (c.region_kind == RegionKind::nation) {
    RegionMap m;
    for (const auto& d : in.demand) m.emplace(d.zcta, "US");
    return m;
  }
  if (c.in_fragments.empty()) {
    throw UsageError("--in-fragments is required for --region-kind " +
                     std::string(to_string(c.region_kind)));
  }
  return assign_region(in.fragments, c.region_kind);
}

FacilityAttribution attribution(const RunConfig& c) {
  return c.region_kind == RegionKind::state ? FacilityAttribution::by_state
                                            : FacilityAttribution::by_zip;
}

std::vector<SiteFeature> existing_features(std::span<const FacilitySite> facilities) {
  std::vector<SiteFeature> out;
  for (const auto& f : facilities) out.push_back({f.id, f.point, SiteRole::existing});
  return out;
}

void append_features(std::vector<SiteFeature>& out, const CoverageMatrix& m,
                     std::span<const std::size_t> sites, SiteRole role) {
  for (std::size_t c : sites) out.push_back({m.candidate(c).id, m.candidate(c).point, role});
}

int cmd_ingest(const RunConfig& c, std::ostream& out) {
  if (c.in_facilities.empty() && c.in_demand.empty()) {
    throw UsageError("ingest needs --in-facilities and/or --in-demand");
  }
  std::string summary;
  if (!c.in_facilities.empty()) {
    const auto raw = read_facilities_file(c.in_facilities);
    const auto merged = dedupe_by_location(raw, c.dedupe_eps_miles);
    std::ostringstream s;
    emit_facilities(s, merged);
    emit_text(s.str(), out_path(c, "facilities.csv"));
    summary += " facilities_in=" + std::to_string(raw.size()) +
               " facilities_out=" + std::to_string(merged.size());
  }
  if (!c.in_demand.empty()) {
    const auto demand = read_demand_file(c.in_demand);
    std::ostringstream s;
    emit_demand(s, demand);
    emit_text(s.str(), out_path(c, "demand.csv"));
    summary += " demand=" + std::to_string(demand.size());
  }
  if (!c.in_fragments.empty()) {
    const auto fragments = read_fragments_file(c.in_fragments);
    std::ostringstream s;
    emit_fragments(s, fragments);
    emit_text(s.str(), out_path(c, "fragments.csv"));
    summary += " fragments=" + std::to_string(fragments.size());
  }
  out << "ingest" << summary << '\n';
  return kOk;
}

int cmd_coverage(const RunConfig& c, std::ostream& out) {
  const Inputs in = load(c, true, true);
  const auto field = compute_field(in.demand, in.facilities, c.radius_miles);
  const auto split = classify(field, in.demand);

  emit_csv(field_table(field), out_path(c, "coverage_field.csv"));
  emit_text(field_geojson(field, in.demand), out_path(c, "coverage_field.geojson"));

  Table summary{{"population", "covered", "underserved", "radius_miles"}, {}};
  summary.rows.push_back({std::to_string(split.covered + split.underserved),
                          std::to_string(split.covered), std::to_string(split.underserved),
                          format_double(c.radius_miles)});
  emit_csv(summary, out_path(c, "summary.csv"));

  if (!in.facilities.empty() && total_weight(in.demand) > 0) {
    const auto grid = percentile_grid(100);
    emit_csv(quantile_table(quantile_curve(field, in.demand, grid)), out_path(c, "quantiles.csv"));
  } else {
    emit_csv(quantile_table({}), out_path(c, "quantiles.csv"));
  }

  const auto stats =
      aggregate(field, in.demand, region_map(c, in), in.facilities, attribution(c));
  emit_csv(region_stats_table(stats), out_path(c, "region_stats.csv"));

  out << "coverage population=" << split.covered + split.underserved
      << " covered=" << split.covered << " underserved=" << split.underserved
      << " radius_miles=" << format_double(c.radius_miles) << '\n';
  return kOk;
}

int cmd_underserved(const RunConfig& c, std::ostream& out) {
  const Inputs in = load(c, true, true);
  const auto field = compute_field(in.demand, in.facilities, c.radius_miles);
  const auto stats =
      aggregate(field, in.demand, region_map(c, in), in.facilities, attribution(c));
  const auto found = find_underserved(stats);

  std::set<std::string> flagged(found.region_ids.begin(), found.region_ids.end());
  Table t{{"region_id", "population", "weighted_mean_distance"}, {}};
  for (const auto& s : stats) {
    if (!flagged.contains(s.region_id)) continue;
    t.rows.push_back({s.region_id, std::to_string(s.population),
                      format_double(*s.weighted_mean_distance)});
  }
  emit_csv(t, out_path(c, "underserved.csv"));
  out << "underserved regions=" << found.region_ids.size()
      << " distance_q3=" << format_double(found.distance_threshold)
      << " population_q3=" << format_double(found.population_threshold) << '\n';
  return kOk;
}

int cmd_add(const RunConfig& c, std::ostream& out) {
  const Inputs in = load(c, true, true);
  const auto field = compute_field(in.demand, in.facilities, c.radius_miles);
  const auto baseline = covered_mask(field);
  const auto matrix = CoverageMatrix::over_demand(in.demand, c.radius_miles);
  auto features = existing_features(in.facilities);

  Persons total = 0;
  if (c.scope == ScopeKind::nation) {
    const auto pool = greedy_pool(matrix, baseline, Scope::nation(), c.candidates);
    if (pool.empty()) throw InvalidInput("add: no candidate sites");
    const auto picks = greedy_add(matrix, baseline, c.k, pool);
    for (const auto& p : picks) {
      total += p.marginal_gain;
      append_features(features, matrix, std::vector<std::size_t>{p.candidate}, SiteRole::added);
    }
    emit_csv(greedy_table(picks, matrix), out_path(c, "greedy.csv"));
  } else {
    std::set<std::string> states;
    for (const auto& d : in.demand) states.insert(d.state);
    Table by_state{{"state", "rank", "zcta", "lat", "lon", "marginal_gain"}, {}};
    Table gains{{"state", "covered", "gain"}, {}};
    for (const auto& state : states) {
      Persons covered = 0;
      for (std::size_t d = 0; d < in.demand.size(); ++d) {
        if (in.demand[d].state == state && baseline[d]) covered += in.demand[d].weight;
      }
      const auto pool = greedy_pool(matrix, baseline, Scope::of_state(state), c.candidates);
      Persons gain = 0;
      if (!pool.empty()) {
        const auto picks = greedy_add(matrix, baseline, c.k, pool);
        const auto rows = greedy_table(picks, matrix);
        for (const auto& row : rows.rows) {
          std::vector<std::string> r{state};
          r.insert(r.end(), row.begin(), row.end());
          by_state.rows.push_back(std::move(r));
        }
        for (const auto& p : picks) {
          gain += p.marginal_gain;
          append_features(features, matrix, std::vector<std::size_t>{p.candidate},
                          SiteRole::added);
        }
      }
      total += gain;
      gains.rows.push_back({state, std::to_string(covered), std::to_string(gain)});
    }
    emit_csv(by_state, out_path(c, "greedy_by_state.csv"));
    emit_csv(gains, out_path(c, "state_gains.csv"));
  }
  emit_text(sites_geojson(features), out_path(c, "greedy.geojson"));
  out << "add k=" << c.k << " scope=" << (c.scope == ScopeKind::nation ? "nation" : "state")
      << " total_gain=" << total << '\n';
  return kOk;
}

RearrangeOptions rearrange_options(const RunConfig& c, std::size_t size) {
  RearrangeOptions o;
  o.network_size = size;
  o.samples = c.n_samples;
  o.patience = c.patience;
  o.batch = c.batch;
  o.cap.max_load = c.capacity;
  o.seed = c.seed;
  return o;
}

int cmd_rearrange(const RunConfig& c, std::ostream& out) {
  const Inputs in = load(c, true, true);
  const auto field = compute_field(in.demand, in.facilities, c.radius_miles);
  const Persons baseline = classify(field, in.demand).covered;
  const auto matrix = CoverageMatrix::over_demand(in.demand, c.radius_miles);
  auto features = existing_features(in.facilities);

  if (c.scope == ScopeKind::nation) {
    const std::size_t size = c.network_size ? c.network_size : in.facilities.size();
    const auto options = rearrange_options(c, size);
    RandomSearchOptions search{size, options.samples, options.cap, options.seed};
    const auto start = random_search(matrix, search);
    ImproveOptions improve{options.cap, options.seed, options.patience, options.batch};
    const auto plan = iterative_improve(start.plan, matrix, improve);

    emit_csv(plan_table(plan, matrix), out_path(c, "plan.csv"));
    append_features(features, matrix, plan.sites, SiteRole::rearranged);
    emit_text(sites_geojson(features), out_path(c, "plan.geojson"));
    Table summary{{"network_size", "baseline_covered", "search_covered", "plan_covered", "gain",
                   "max_load", "valid_networks", "attempts"},
                  {}};
    summary.rows.push_back({std::to_string(size), std::to_string(baseline),
                            std::to_string(start.plan.covered_population),
                            std::to_string(plan.covered_population),
                            std::to_string(plan.covered_population - baseline),
                            std::to_string(plan.max_load()), std::to_string(start.valid_networks),
                            std::to_string(start.attempts)});
    emit_csv(summary, out_path(c, "rearrange_summary.csv"));
    out << "rearrange scope=nation size=" << size << " baseline_covered=" << baseline
        << " plan_covered=" << plan.covered_population << '\n';
    return kOk;
  }

  const auto disks =
      CoverageMatrix::build(in.demand, facility_candidates(in.facilities), c.radius_miles);
  StateOptions so;
  so.mode = StateMode::rearrange;
  so.rearrange = rearrange_options(c, 0);
  const auto results = optimize_states(in.demand, in.facilities, matrix, disks, so);
  Table plans{{"state", "zcta", "load"}, {}};
  Table gains{{"state", "covered", "gain"}, {}};
  Persons total = 0;
  for (const auto& r : results) {
    if (r.plan) {
      const auto rows = plan_table(*r.plan, matrix);
      for (const auto& row : rows.rows) plans.rows.push_back({r.state, row[0], row[1]});
      append_features(features, matrix, r.plan->sites, SiteRole::rearranged);
    }
    total += r.gain;
    gains.rows.push_back({r.state, std::to_string(r.currently_covered), std::to_string(r.gain)});
  }
  emit_csv(plans, out_path(c, "plan_by_state.csv"));
  emit_csv(gains, out_path(c, "state_gains.csv"));
  emit_text(sites_geojson(features), out_path(c, "plan.geojson"));
  out << "rearrange scope=state states=" << results.size() << " total_gain=" << total << '\n';
  return kOk;
}

int cmd_compare(const RunConfig& c, std::ostream& out) {
  const Inputs in = load(c, true, true);
  const auto matrix = CoverageMatrix::over_demand(in.demand, c.radius_miles);
  const RegionMap regions = region_map(c, in);

  NetworkPlan optimal;
  if (!c.in_plan.empty()) {
    std::vector<std::size_t> sites;
    for (const auto& id : read_plan_file(c.in_plan)) {
      const auto idx = matrix.find(id);
      if (!idx) throw SchemaError(0, "zcta", "plan site '" + id + "' is not a demand centroid");
      sites.push_back(*idx);
    }
    optimal = assign_demand(matrix, sites);
  } else {
    const std::size_t size = c.network_size ? c.network_size : in.facilities.size();
    optimal = rearrange(matrix, rearrange_options(c, size));
  }
  const auto rows = compare_networks(facility_regions(in.facilities, regions, attribution(c)),
                                     plan_regions(optimal, matrix, in.demand, regions));
  emit_csv(comparison_table(rows), out_path(c, "comparison.csv"));

  const auto disks =
      CoverageMatrix::build(in.demand, facility_candidates(in.facilities), c.radius_miles);
  StateOptions add;
  add.mode = StateMode::add_one;
  add.policy = c.candidates;
  StateOptions re;
  re.mode = StateMode::rearrange;
  re.rearrange = rearrange_options(c, 0);
  const auto gains = gains_by_state(optimize_states(in.demand, in.facilities, matrix, disks, add),
                                    optimize_states(in.demand, in.facilities, matrix, disks, re));
  emit_csv(gains_table(gains), out_path(c, "gains.csv"));
  out << "compare regions=" << rows.size() << " states=" << gains.size() << '\n';
  return kOk;
}

int cmd_synth(const RunConfig& c, const SynthOptions& base, std::ostream& out) {
  SynthOptions o = base;
  o.seed = c.seed;
  const auto data = synthesize(o);
  std::ostringstream d, f, g;
  emit_demand(d, data.demand);
  emit_facilities(f, data.facilities);
  emit_fragments(g, data.fragments);
  emit_text(d.str(), out_path(c, "demand.csv"));
  emit_text(f.str(), out_path(c, "facilities.csv"));
  emit_text(g.str(), out_path(c, "fragments.csv"));
  out << "synth demand=" << data.demand.size() << " facilities=" << data.facilities.size()
      << " fragments=" << data.fragments.size() << '\n';
  return kOk;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::string q;
  for (char ch : s) {
    if (ch == '"' || ch == '\\') q += '\\';
    q += ch;
  }
  return q;
}

int fail(std::ostream& err, int code, const char* kind, const std::string& message) {
  err << "error code=" << code << " kind=" << kind << " message=\"" << one_line(message) << "\"\n";
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coverage analysis and facility network optimization", "coveropt"};
  app.require_subcommand(1);

  // Flag name -> RunConfig key. Values are applied after the config file so
  // flags win.
  const std::vector<std::pair<std::string, std::string>> flags = {
      {"--radius", "radius_miles"},     {"--capacity", "capacity"},
      {"--seed", "seed"},               {"--samples", "n_samples"},
      {"--patience", "patience"},       {"--scope", "scope"},
      {"--k", "k"},                     {"--dedupe-eps", "dedupe_eps_miles"},
      {"--batch", "batch"},             {"--size", "network_size"},
      {"--candidates", "candidates"},   {"--region-kind", "region_kind"},
      {"--in-facilities", "in_facilities"}, {"--in-demand", "in_demand"},
      {"--in-fragments", "in_fragments"},   {"--plan", "in_plan"},
      {"--out-dir", "out_dir"},
  };
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  for (const auto& [flag, key] : flags) {
    options[key] = app.add_option(flag, values[key], key);
  }
  std::string config_path;
  app.add_option("--config", config_path, "flat key = value file of RunConfig fields");

  SynthOptions synth;
  auto* ingest = app.add_subcommand("ingest", "validate, dedupe and normalize input files");
  auto* coverage = app.add_subcommand("coverage", "coverage field, statistics and quantiles");
  auto* underserved = app.add_subcommand("underserved", "regions above both Q3 thresholds");
  auto* add = app.add_subcommand("add", "greedy placement of k new sites");
  auto* rearr = app.add_subcommand("rearrange", "capacity-constrained network rearrangement");
  auto* compare = app.add_subcommand("compare", "current vs optimal counts and state gains");
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic dataset");
  synth_cmd->add_option("--demand-points", synth.demand_points);
  synth_cmd->add_option("--facilities", synth.facilities);
  synth_cmd->add_option("--cities", synth.cities);
  synth_cmd->add_option("--urban-share", synth.urban_share);
  synth_cmd->add_option("--colocated-share", synth.colocated_share);
  synth_cmd->add_option("--duplicates", synth.duplicate_share);
  for (auto* sub : {ingest, coverage, underserved, add, rearr, compare, synth_cmd}) {
    sub->fallthrough();
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    return fail(err, kUsage, "usage", e.what());
  }

  try {
    RunConfig config;
    if (!config_path.empty()) apply_config_file(config, config_path);
    for (const auto& [flag, key] : flags) {
      if (options[key]->count() > 0) apply_setting(config, key, values[key]);
    }
    config.validate();

    if (*ingest) return cmd_ingest(config, out);
    if (*coverage) return cmd_coverage(config, out);
    if (*underserved) return cmd_underserved(config, out);
    if (*add) return cmd_add(config, out);
    if (*rearr) return cmd_rearrange(config, out);
    if (*compare) return cmd_compare(config, out);
    if (*synth_cmd) return cmd_synth(config, synth, out);
    return fail(err, kUsage, "usage", "no command given");
  } catch (const UsageError& e) {
    return fail(err, kUsage, "usage", e.what());
  } catch (const IoError& e) {
    return fail(err, kMissingFile, "io", e.what());
  } catch (const SchemaError& e) {
    return fail(err, kSchema, "schema", e.what());
  } catch (const std::exception& e) {
    return fail(err, kFailure, "runtime", e.what());
  }
}

}  // namespace coveropt::cli

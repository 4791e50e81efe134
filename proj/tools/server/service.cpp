#include "service.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace coveropt::server {
namespace {

using json = nlohmann::ordered_json;

struct HttpError : std::runtime_error {
  HttpError(int status, const std::string& message) : std::runtime_error(message), status(status) {}
  int status;
};

Response reply(int status, const json& body) { return {status, body.dump() + "\n"}; }

Response error_reply(int status, const std::string& message) {
  return reply(status, json{{"error", message}});
}

double round4(double miles) { return std::round(miles * 1e4) / 1e4; }

json parse_body(const std::string& body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw HttpError(400, "request body is not valid JSON");
  if (!j.is_object()) throw HttpError(400, "request body must be a JSON object");
  return j;
}

// Reads an optional non-negative integer field; anything else is a 422.
std::optional<std::uint64_t> opt_uint(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_unsigned()) {
    throw HttpError(422, std::string(key) + " must be a non-negative integer");
  }
  return it->get<std::uint64_t>();
}

std::optional<std::string> opt_string(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw HttpError(422, std::string(key) + " must be a string");
  return it->get<std::string>();
}

CandidatePolicy parse_policy(const json& j) {
  const auto v = opt_string(j, "candidates");
  if (!v || *v == "underserved") return CandidatePolicy::underserved;
  if (*v == "all") return CandidatePolicy::all;
  throw HttpError(422, "candidates must be 'underserved' or 'all'");
}

json placements_json(std::span<const Placement> picks, const CoverageMatrix& m) {
  json out = json::array();
  int rank = 1;
  for (const auto& p : picks) {
    const auto& c = m.candidate(p.candidate);
    out.push_back({{"rank", rank++},
                   {"zcta", c.id},
                   {"lat", c.point.lat},
                   {"lon", c.point.lon},
                   {"marginal_gain", p.marginal_gain}});
  }
  return out;
}

Persons sum_gain(std::span<const Placement> picks) {
  Persons total = 0;
  for (const auto& p : picks) total += p.marginal_gain;
  return total;
}

// Holds one slot of the in-flight optimizer budget.
class Slot {
 public:
  Slot(std::atomic<int>& counter, int limit) : counter_(counter) {
    if (counter_.fetch_add(1) >= limit) {
      counter_.fetch_sub(1);
      throw HttpError(429, "too many optimization requests in flight");
    }
  }
  ~Slot() { counter_.fetch_sub(1); }
  Slot(const Slot&) = delete;
  Slot& operator=(const Slot&) = delete;

 private:
  std::atomic<int>& counter_;
};

template <class Fn>
Response guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const HttpError& e) {
    return error_reply(e.status, e.what());
  } catch (const InvalidInput& e) {
    return error_reply(422, e.what());
  } catch (const std::exception& e) {
    return error_reply(500, e.what());
  }
}

}  // namespace

std::shared_ptr<const Snapshot> make_snapshot(std::vector<DemandPoint> demand,
                                              std::vector<FacilitySite> facilities,
                                              double radius_miles) {
  auto s = std::make_shared<Snapshot>();
  s->radius_miles = radius_miles;
  s->demand = std::move(demand);
  s->facilities = std::move(facilities);
  s->demand_index = index_demand(s->demand);
  s->matrix = CoverageMatrix::over_demand(s->demand, radius_miles);
  s->field = compute_field(s->demand, s->facilities, radius_miles);
  s->baseline = covered_mask(s->field);
  s->split = classify(s->field, s->demand);
  if (!s->facilities.empty() && total_weight(s->demand) > 0) {
    const auto grid = percentile_grid(100);
    s->quantiles = quantile_curve(s->field, s->demand, grid);
  }
  return s;
}

Service::Service(std::shared_ptr<const Snapshot> snapshot, ServiceOptions options)
    : snapshot_(std::move(snapshot)), options_(std::move(options)) {}

Response Service::health() const {
  return reply(200, json{{"status", "ok"}, {"snapshot", snapshot_ != nullptr}});
}

Response Service::coverage() const {
  if (!snapshot_) return error_reply(503, "no snapshot loaded");
  const auto& s = *snapshot_;
  json quantiles = json::array();
  for (const auto& p : s.quantiles) quantiles.push_back({{"q", p.q}, {"miles", round4(p.miles)}});
  return reply(200, json{{"radius_miles", s.radius_miles},
                         {"population", s.split.covered + s.split.underserved},
                         {"covered", s.split.covered},
                         {"underserved", s.split.underserved},
                         {"quantiles", std::move(quantiles)}});
}

Response Service::whatif(const std::string& body) const {
  if (!snapshot_) return error_reply(503, "no snapshot loaded");
  return guarded([&] {
    const auto& s = *snapshot_;
    const json j = parse_body(body);
    const auto it = j.find("sites");
    if (it == j.end() || !it->is_array()) throw HttpError(400, "sites must be an array");
    if (it->size() > options_.max_whatif_sites) {
      throw HttpError(413, "at most " + std::to_string(options_.max_whatif_sites) +
                               " sites per request");
    }

    std::vector<GeoPoint> points;
    for (const auto& site : *it) {
      if (!site.is_object()) throw HttpError(400, "each site must be an object");
      if (site.contains("zcta")) {
        if (!site["zcta"].is_string()) throw HttpError(400, "zcta must be a string");
        const auto id = site["zcta"].get<std::string>();
        const auto c = s.matrix.find(id);
        if (!c) throw HttpError(400, "unknown zcta '" + id + "'");
        points.push_back(s.matrix.candidate(*c).point);
        continue;
      }
      const auto lat = site.find("lat");
      const auto lon = site.find("lon");
      if (lat == site.end() || lon == site.end() || !lat->is_number() || !lon->is_number()) {
        throw HttpError(400, "each site needs numeric lat and lon, or a zcta");
      }
      const GeoPoint p{lat->get<double>(), lon->get<double>()};
      if (!p.valid()) throw HttpError(400, "coordinates out of range");
      points.push_back(p);
    }

    std::set<std::size_t> newly;
    for (const auto& p : points) {
      for (const auto& n : s.demand_index.within_radius(p, s.radius_miles)) {
        if (!s.baseline[n.index]) newly.insert(n.index);
      }
    }
    Persons gain = 0;
    std::vector<std::string> zctas;
    for (std::size_t d : newly) {
      gain += s.demand[d].weight;
      zctas.push_back(s.demand[d].zcta);
    }
    std::sort(zctas.begin(), zctas.end());
    return reply(200, json{{"gain", gain}, {"newly_covered_zctas", zctas}});
  });
}

Response Service::greedy(const std::string& body) {
  if (!snapshot_) return error_reply(503, "no snapshot loaded");
  return guarded([&] {
    const auto& s = *snapshot_;
    const json j = parse_body(body);
    const auto k = opt_uint(j, "k").value_or(1);
    if (k < 1 || k > static_cast<std::uint64_t>(options_.max_k)) {
      throw HttpError(422, "k must be in [1, " + std::to_string(options_.max_k) + "]");
    }
    const auto scope = opt_string(j, "scope").value_or("nation");
    if (scope != "nation" && scope != "state") {
      throw HttpError(422, "scope must be 'nation' or 'state'");
    }
    const auto policy = parse_policy(j);
    const auto only_state = opt_string(j, "state");
    if (only_state && scope != "state") throw HttpError(422, "state requires scope 'state'");

    Slot slot(in_flight_, options_.max_in_flight);
    const int kk = static_cast<int>(k);

    if (scope == "nation") {
      const auto pool = greedy_pool(s.matrix, s.baseline, Scope::nation(), policy);
      if (pool.empty()) throw HttpError(422, "no candidate sites");
      const auto picks = greedy_add(s.matrix, s.baseline, kk, pool);
      return reply(200, json{{"k", k},
                             {"scope", scope},
                             {"total_gain", sum_gain(picks)},
                             {"placements", placements_json(picks, s.matrix)}});
    }

    std::set<std::string> states;
    for (const auto& d : s.demand) states.insert(d.state);
    if (only_state) {
      if (!states.contains(*only_state)) throw HttpError(422, "unknown state '" + *only_state + "'");
      states = {*only_state};
    }
    json per_state = json::array();
    Persons total = 0;
    for (const auto& state : states) {
      Persons covered = 0;
      for (std::size_t d = 0; d < s.demand.size(); ++d) {
        if (s.demand[d].state == state && s.baseline[d]) covered += s.demand[d].weight;
      }
      const auto pool = greedy_pool(s.matrix, s.baseline, Scope::of_state(state), policy);
      std::vector<Placement> picks;
      if (!pool.empty()) picks = greedy_add(s.matrix, s.baseline, kk, pool);
      const Persons gain = sum_gain(picks);
      total += gain;
      per_state.push_back({{"state", state},
                           {"covered", covered},
                           {"gain", gain},
                           {"placements", placements_json(picks, s.matrix)}});
    }
    return reply(200, json{{"k", k},
                           {"scope", scope},
                           {"total_gain", total},
                           {"states", std::move(per_state)}});
  });
}

Response Service::rearrange(const std::string& body) {
  if (!snapshot_) return error_reply(503, "no snapshot loaded");
  return guarded([&] {
    const auto& s = *snapshot_;
    const json j = parse_body(body);
    const auto seed = opt_uint(j, "seed").value_or(0);
    const auto samples = opt_uint(j, "samples").value_or(options_.max_samples);
    if (samples < 1 || samples > options_.max_samples) {
      throw HttpError(422, "samples must be in [1, " + std::to_string(options_.max_samples) + "]");
    }
    const auto patience = opt_uint(j, "patience").value_or(kDefaultPatience);
    if (patience < 1 || patience > options_.max_patience) {
      throw HttpError(422,
                      "patience must be in [1, " + std::to_string(options_.max_patience) + "]");
    }
    const auto batch = opt_uint(j, "batch").value_or(1);
    if (batch < 1) throw HttpError(422, "batch must be >= 1");
    const auto size = opt_uint(j, "size").value_or(s.facilities.size());
    if (size < 1 || size > s.matrix.candidate_count()) {
      throw HttpError(422, "size must be in [1, " + std::to_string(s.matrix.candidate_count()) +
                               "]");
    }

    Slot slot(in_flight_, options_.max_in_flight);
    const CapacityConstraint cap{options_.capacity};
    const RandomSearchOptions search{size, samples, cap, seed};
    RandomSearchResult start;
    try {
      start = random_search(s.matrix, search);
    } catch (const InvalidInput&) {
      throw;
    } catch (const std::runtime_error& e) {
      throw HttpError(422, e.what());
    }
    const ImproveOptions improve{cap, seed, patience, batch};
    const auto plan = iterative_improve(start.plan, s.matrix, improve);

    json sites = json::array();
    for (std::size_t i = 0; i < plan.sites.size(); ++i) {
      sites.push_back({{"zcta", s.matrix.candidate(plan.sites[i]).id}, {"load", plan.loads[i]}});
    }
    const Persons baseline = s.split.covered;
    return reply(200, json{{"network_size", size},
                           {"baseline_covered", baseline},
                           {"search_covered", start.plan.covered_population},
                           {"plan_covered", plan.covered_population},
                           {"gain", plan.covered_population - baseline},
                           {"max_load", plan.max_load()},
                           {"valid_networks", start.valid_networks},
                           {"attempts", start.attempts},
                           {"sites", std::move(sites)}});
  });
}

void mount(httplib::Server& http, Service& service) {
  const std::string origin = service.options().cors_origin;
  auto send = [origin](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
    if (!origin.empty()) res.set_header("Access-Control-Allow-Origin", origin);
  };

  http.Get("/v1/health", [&service, send](const httplib::Request&, httplib::Response& res) {
    send(res, service.health());
  });
  http.Get("/v1/coverage", [&service, send](const httplib::Request&, httplib::Response& res) {
    send(res, service.coverage());
  });
  http.Post("/v1/whatif", [&service, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service.whatif(req.body));
  });
  http.Post("/v1/optimize/greedy",
            [&service, send](const httplib::Request& req, httplib::Response& res) {
              send(res, service.greedy(req.body));
            });
  http.Post("/v1/optimize/rearrange",
            [&service, send](const httplib::Request& req, httplib::Response& res) {
              send(res, service.rearrange(req.body));
            });
  if (!origin.empty()) {
    http.Options(R"(/v1/.*)", [origin](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    });
  }
}

}  // namespace coveropt::server

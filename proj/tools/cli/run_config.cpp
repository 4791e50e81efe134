#include "run_config.hpp"

#include <charconv>
#include <fstream>
#include <istream>

#include "coveropt/report.hpp"

namespace coveropt::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T v{};
  const auto* end = value.data() + value.size();
  const auto res = std::from_chars(value.data(), end, v);
  if (value.empty() || res.ec != std::errc() || res.ptr != end) {
    throw UsageError("invalid value for " + key + ": '" + value + "'");
  }
  return v;
}

}  // namespace

void RunConfig::validate() const {
  if (!(radius_miles > 0.0)) throw UsageError("radius_miles must be > 0");
  if (capacity <= 0) throw UsageError("capacity must be > 0");
  if (n_samples == 0) throw UsageError("n_samples must be > 0");
  if (patience == 0) throw UsageError("patience must be > 0");
  if (k <= 0) throw UsageError("k must be > 0");
  if (!(dedupe_eps_miles > 0.0)) throw UsageError("dedupe_eps_miles must be > 0");
  if (batch == 0) throw UsageError("batch must be > 0");
  if (out_dir.empty()) throw UsageError("out_dir must not be empty");
}

void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "radius_miles") {
    c.radius_miles = parse_number<double>(key, value);
  } else if (key == "capacity") {
    c.capacity = parse_number<Persons>(key, value);
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "n_samples") {
    c.n_samples = parse_number<std::size_t>(key, value);
  } else if (key == "patience") {
    c.patience = parse_number<std::size_t>(key, value);
  } else if (key == "scope") {
    if (value == "nation") {
      c.scope = ScopeKind::nation;
    } else if (value == "state") {
      c.scope = ScopeKind::state;
    } else {
      throw UsageError("scope must be 'nation' or 'state', got '" + value + "'");
    }
  } else if (key == "k") {
    c.k = parse_number<int>(key, value);
  } else if (key == "dedupe_eps_miles") {
    c.dedupe_eps_miles = parse_number<double>(key, value);
  } else if (key == "batch") {
    c.batch = parse_number<std::size_t>(key, value);
  } else if (key == "network_size") {
    c.network_size = parse_number<std::size_t>(key, value);
  } else if (key == "candidates") {
    if (value == "underserved") {
      c.candidates = CandidatePolicy::underserved;
    } else if (value == "all") {
      c.candidates = CandidatePolicy::all;
    } else {
      throw UsageError("candidates must be 'underserved' or 'all', got '" + value + "'");
    }
  } else if (key == "region_kind") {
    try {
      c.region_kind = parse_region_kind(value);
    } catch (const InvalidInput& e) {
      throw UsageError(e.what());
    }
  } else if (key == "in_facilities") {
    c.in_facilities = value;
  } else if (key == "in_demand") {
    c.in_demand = value;
  } else if (key == "in_fragments") {
    c.in_fragments = value;
  } else if (key == "in_plan") {
    c.in_plan = value;
  } else if (key == "out_dir") {
    c.out_dir = value;
  } else {
    throw UsageError("unknown config key '" + key + "'");
  }
}

void apply_config_stream(RunConfig& config, std::istream& in) {
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    apply_setting(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  apply_config_stream(config, in);
}

}  // namespace coveropt::cli

#include "coveropt/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>

#include "coveropt/parallel.hpp"
#include "coveropt/random.hpp"

namespace coveropt {
namespace {

constexpr std::uint64_t kImproveStream = 0xfffffffffffffff1ULL;
constexpr std::size_t kSearchBatch = 2048;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Candidate indices sorted by id rank; empty input means all candidates.
std::vector<std::size_t> canonical_pool(const CoverageMatrix& matrix,
                                        std::span<const std::size_t> candidates) {
  std::vector<std::size_t> pool;
  if (candidates.empty()) {
    pool.resize(matrix.candidate_count());
    for (std::size_t c = 0; c < pool.size(); ++c) pool[c] = c;
  } else {
    pool.assign(candidates.begin(), candidates.end());
  }
  for (std::size_t c : pool) {
    if (c >= matrix.candidate_count()) throw InvalidInput("candidate index out of range");
  }
  std::sort(pool.begin(), pool.end(),
            [&](std::size_t a, std::size_t b) { return matrix.rank(a) < matrix.rank(b); });
  if (std::adjacent_find(pool.begin(), pool.end()) != pool.end()) {
    throw InvalidInput("duplicate candidate in candidate set");
  }
  return pool;
}

void require_baseline(const CoverageMatrix& matrix, const CoveredMask& baseline) {
  if (baseline.size() != matrix.demand_count()) {
    throw InvalidInput("baseline mask length does not match the demand set");
  }
}

// Scratch space for scoring networks without building a full NetworkPlan.
class Evaluator {
 public:
  explicit Evaluator(const CoverageMatrix& matrix)
      : m_(matrix),
        best_miles_(matrix.demand_count()),
        best_pos_(matrix.demand_count()),
        stamp_(matrix.demand_count(), 0) {}

  struct Score {
    Persons covered = 0;
    Persons max_load = 0;
  };

  Score run(std::span<const std::size_t> sites) {
    if (++epoch_ == 0) {
      std::fill(stamp_.begin(), stamp_.end(), 0);
      epoch_ = 1;
    }
    touched_.clear();
    for (std::size_t p = 0; p < sites.size(); ++p) {
      const std::size_t c = sites[p];
      const auto rows = m_.demand_of(c);
      const auto miles = m_.miles_of(c);
      for (std::size_t k = 0; k < rows.size(); ++k) {
        const std::uint32_t d = rows[k];
        if (stamp_[d] != epoch_) {
          stamp_[d] = epoch_;
          best_miles_[d] = miles[k];
          best_pos_[d] = static_cast<std::uint32_t>(p);
          touched_.push_back(d);
        } else if (miles[k] < best_miles_[d] ||
                   (miles[k] == best_miles_[d] && m_.rank(c) < m_.rank(sites[best_pos_[d]]))) {
          best_miles_[d] = miles[k];
          best_pos_[d] = static_cast<std::uint32_t>(p);
        }
      }
    }
    loads_.assign(sites.size(), 0);
    Score s;
    for (std::uint32_t d : touched_) {
      loads_[best_pos_[d]] += m_.demand_weight(d);
      s.covered += m_.demand_weight(d);
    }
    for (Persons l : loads_) s.max_load = std::max(s.max_load, l);
    return s;
  }

 private:
  const CoverageMatrix& m_;
  std::vector<double> best_miles_;
  std::vector<std::uint32_t> best_pos_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
  std::vector<std::uint32_t> touched_;
  std::vector<Persons> loads_;
};

// Partial Fisher-Yates over a reusable identity permutation; draw() leaves
// the permutation as it found it.
class SubsetSampler {
 public:
  explicit SubsetSampler(std::size_t n) : perm_(n) {
    for (std::size_t i = 0; i < n; ++i) perm_[i] = i;
  }

  void draw(Rng& rng, std::size_t k, std::vector<std::size_t>& out) {
    const std::size_t n = perm_.size();
    swaps_.clear();
    out.clear();
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t r = j + static_cast<std::size_t>(rng.below(n - j));
      std::swap(perm_[j], perm_[r]);
      swaps_.push_back(r);
      out.push_back(perm_[j]);
    }
    for (std::size_t j = k; j-- > 0;) std::swap(perm_[j], perm_[swaps_[j]]);
  }

 private:
  std::vector<std::size_t> perm_;
  std::vector<std::size_t> swaps_;
};

void sample_network(SubsetSampler& sampler, std::span<const std::size_t> pool,
                    std::uint64_t seed, std::uint64_t attempt, std::size_t size,
                    std::vector<std::size_t>& positions, std::vector<std::size_t>& sites) {
  Rng rng(mix_seed(seed, attempt));
  sampler.draw(rng, size, positions);
  sites.clear();
  for (std::size_t p : positions) sites.push_back(pool[p]);
}

double choose(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

}  // namespace

Persons NetworkPlan::max_load() const {
  Persons m = 0;
  for (Persons l : loads) m = std::max(m, l);
  return m;
}

NetworkPlan assign_demand(const CoverageMatrix& matrix, std::span<const std::size_t> sites) {
  NetworkPlan plan;
  plan.sites.assign(sites.begin(), sites.end());
  for (std::size_t c : plan.sites) {
    if (c >= matrix.candidate_count()) throw InvalidInput("plan site index out of range");
  }
  std::sort(plan.sites.begin(), plan.sites.end(),
            [&](std::size_t a, std::size_t b) { return matrix.rank(a) < matrix.rank(b); });
  if (std::adjacent_find(plan.sites.begin(), plan.sites.end()) != plan.sites.end()) {
    throw InvalidInput("plan lists a site twice");
  }

  const std::size_t nd = matrix.demand_count();
  std::vector<double> best(nd, std::numeric_limits<double>::infinity());
  plan.assignment.assign(nd, -1);
  // Sites are visited in id order, so strict '<' keeps the smallest id on ties.
  for (std::size_t p = 0; p < plan.sites.size(); ++p) {
    const auto rows = matrix.demand_of(plan.sites[p]);
    const auto miles = matrix.miles_of(plan.sites[p]);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (miles[k] < best[rows[k]]) {
        best[rows[k]] = miles[k];
        plan.assignment[rows[k]] = static_cast<std::int32_t>(p);
      }
    }
  }
  plan.loads.assign(plan.sites.size(), 0);
  for (std::size_t d = 0; d < nd; ++d) {
    if (plan.assignment[d] >= 0) {
      plan.loads[static_cast<std::size_t>(plan.assignment[d])] += matrix.demand_weight(d);
      plan.covered_population += matrix.demand_weight(d);
    }
  }
  return plan;
}

std::vector<std::size_t> eligible_candidates(const CoverageMatrix& matrix,
                                             const CoveredMask& baseline, const Scope& scope,
                                             CandidatePolicy policy) {
  require_baseline(matrix, baseline);
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < matrix.candidate_count(); ++c) {
    const CandidateSite& site = matrix.candidate(c);
    if (scope.kind == Scope::Kind::state && site.state != scope.state) continue;
    if (policy == CandidatePolicy::underserved &&
        (!site.demand_index || baseline.at(*site.demand_index) != 0)) {
      continue;
    }
    out.push_back(c);
  }
  std::sort(out.begin(), out.end(),
            [&](std::size_t a, std::size_t b) { return matrix.rank(a) < matrix.rank(b); });
  return out;
}

std::vector<std::size_t> greedy_pool(const CoverageMatrix& matrix, const CoveredMask& baseline,
                                     const Scope& scope, CandidatePolicy policy) {
  auto pool = eligible_candidates(matrix, baseline, scope, policy);
  if (pool.empty() && policy == CandidatePolicy::underserved) {
    pool = eligible_candidates(matrix, baseline, scope, CandidatePolicy::all);
  }
  return pool;
}

std::vector<Placement> greedy_add(const CoverageMatrix& matrix, const CoveredMask& baseline,
                                  int k, std::span<const std::size_t> candidates) {
  if (k < 1) throw InvalidInput("greedy_add: k must be >= 1");
  if (candidates.empty()) throw InvalidInput("greedy_add: empty candidate set");
  require_baseline(matrix, baseline);
  const auto pool = canonical_pool(matrix, candidates);

  CoveredMask covered = baseline;
  auto gain_of = [&](std::size_t c) {
    Persons g = 0;
    for (std::uint32_t d : matrix.demand_of(c)) {
      if (!covered[d]) g += matrix.demand_weight(d);
    }
    return g;
  };

  struct Entry {
    Persons bound;
    std::uint32_t rank;
    std::size_t candidate;
    int round;
  };
  auto worse = [](const Entry& a, const Entry& b) {
    return a.bound < b.bound || (a.bound == b.bound && a.rank > b.rank);
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);
  for (std::size_t c : pool) heap.push({gain_of(c), matrix.rank(c), c, 0});

  std::vector<Placement> picks;
  const auto steps = std::min<std::size_t>(static_cast<std::size_t>(k), pool.size());
  for (int round = 0; picks.size() < steps; ) {
    Entry top = heap.top();
    heap.pop();
    if (top.round != round) {
      top.bound = gain_of(top.candidate);
      top.round = round;
      heap.push(top);
      continue;
    }
    picks.push_back({top.candidate, top.bound});
    for (std::uint32_t d : matrix.demand_of(top.candidate)) covered[d] = 1;
    ++round;
  }
  return picks;
}

std::vector<Placement> greedy_add(const CoverageMatrix& matrix, const CoveredMask& baseline,
                                  int k, const Scope& scope, CandidatePolicy policy) {
  const auto candidates = eligible_candidates(matrix, baseline, scope, policy);
  return greedy_add(matrix, baseline, k, candidates);
}

SubsetResult brute_force_optimal(const CoverageMatrix& matrix, const CoveredMask& baseline,
                                 int k, std::span<const std::size_t> candidates) {
  require_baseline(matrix, baseline);
  const auto pool = canonical_pool(matrix, candidates);
  if (k < 1 || static_cast<std::size_t>(k) > pool.size()) {
    throw InvalidInput("brute_force_optimal: need 1 <= k <= number of candidates");
  }
  const auto kk = static_cast<std::size_t>(k);
  if (choose(pool.size(), kk) > kBruteForceLimit) {
    throw InvalidInput("brute_force_optimal: C(" + std::to_string(pool.size()) + ", " +
                       std::to_string(k) + ") exceeds the enumeration limit");
  }

  std::vector<std::uint32_t> count(matrix.demand_count(), 0);
  for (std::size_t d = 0; d < count.size(); ++d) count[d] = baseline[d] ? 1 : 0;

  SubsetResult best;
  best.gain = -1;
  std::vector<std::size_t> chosen;
  chosen.reserve(kk);

  // Positions are enumerated in lexicographic order, which is id order, so the
  // first subset reaching the maximum is the lexicographically smallest.
  auto recurse = [&](auto&& self, std::size_t start, Persons gain) -> void {
    if (chosen.size() == kk) {
      if (gain > best.gain) {
        best.gain = gain;
        best.sites.clear();
        for (std::size_t p : chosen) best.sites.push_back(pool[p]);
      }
      return;
    }
    const std::size_t remaining = kk - chosen.size();
    for (std::size_t p = start; p + remaining <= pool.size(); ++p) {
      Persons g = gain;
      for (std::uint32_t d : matrix.demand_of(pool[p])) {
        if (count[d]++ == 0) g += matrix.demand_weight(d);
      }
      chosen.push_back(p);
      self(self, p + 1, g);
      chosen.pop_back();
      for (std::uint32_t d : matrix.demand_of(pool[p])) --count[d];
    }
  };
  recurse(recurse, 0, 0);
  return best;
}

RandomSearchResult random_search(const CoverageMatrix& matrix, const RandomSearchOptions& options,
                                 std::span<const std::size_t> candidates) {
  const auto pool = canonical_pool(matrix, candidates);
  const std::size_t size = options.network_size;
  if (size == 0) throw InvalidInput("random_search: network size must be >= 1");
  if (size > pool.size()) {
    throw InvalidInput("random_search: network size " + std::to_string(size) +
                       " exceeds the " + std::to_string(pool.size()) + " candidate sites");
  }
  if (options.samples == 0) throw InvalidInput("random_search: samples must be >= 1");
  if (options.cap.max_load <= 0) throw InvalidInput("random_search: capacity must be > 0");

  const std::size_t max_attempts = 10 * options.samples;
  std::vector<Persons> covered(kSearchBatch);
  std::vector<std::uint8_t> valid(kSearchBatch);

  RandomSearchResult result;
  Persons best_covered = -1;
  std::uint64_t best_attempt = 0;

  for (std::size_t start = 0;
       start < max_attempts && result.valid_networks < options.samples;) {
    // Never evaluate far past the point where the sample quota fills up.
    const std::size_t needed = options.samples - result.valid_networks;
    const std::size_t batch = std::min({kSearchBatch, max_attempts - start, std::max<std::size_t>(needed, 64)});
    parallel_for(batch, [&](std::size_t begin, std::size_t end) {
      Evaluator eval(matrix);
      SubsetSampler sampler(pool.size());
      std::vector<std::size_t> positions;
      std::vector<std::size_t> sites;
      for (std::size_t j = begin; j < end; ++j) {
        sample_network(sampler, pool, options.seed, start + j, size, positions, sites);
        const auto score = eval.run(sites);
        covered[j] = score.covered;
        valid[j] = score.max_load <= options.cap.max_load ? 1 : 0;
      }
    }, 16);
    for (std::size_t j = 0; j < batch && result.valid_networks < options.samples; ++j) {
      ++result.attempts;
      if (!valid[j]) continue;
      ++result.valid_networks;
      if (covered[j] > best_covered) {
        best_covered = covered[j];
        best_attempt = start + j;
      }
    }
    start += batch;
  }
  if (result.valid_networks == 0) {
    throw std::runtime_error("random_search: no network within capacity after " +
                             std::to_string(result.attempts) + " attempts");
  }
  SubsetSampler sampler(pool.size());
  std::vector<std::size_t> positions;
  std::vector<std::size_t> sites;
  sample_network(sampler, pool, options.seed, best_attempt, size, positions, sites);
  result.plan = assign_demand(matrix, sites);
  return result;
}

NetworkPlan iterative_improve(const NetworkPlan& plan, const CoverageMatrix& matrix,
                              const ImproveOptions& options,
                              std::span<const std::size_t> candidates) {
  if (!plan.within(options.cap)) {
    throw InvalidInput("iterative_improve: input plan violates the capacity constraint");
  }
  const auto pool = canonical_pool(matrix, candidates);
  std::vector<std::uint8_t> in_plan(matrix.candidate_count(), 0);
  std::vector<std::uint8_t> in_pool(matrix.candidate_count(), 0);
  for (std::size_t c : pool) in_pool[c] = 1;
  for (std::size_t c : plan.sites) {
    if (!in_pool.at(c)) throw InvalidInput("iterative_improve: plan site outside the candidate set");
    in_plan[c] = 1;
  }
  std::vector<std::size_t> unused;
  for (std::size_t c : pool) {
    if (!in_plan[c]) unused.push_back(c);
  }

  NetworkPlan current = plan;
  if (current.sites.empty()) return current;

  Rng rng(mix_seed(options.seed, kImproveStream));
  Evaluator eval(matrix);
  std::vector<std::size_t> order(current.sites.size());
  std::vector<std::size_t> trial;
  std::size_t rejections = 0;
  const std::size_t batch = std::max<std::size_t>(1, options.batch);

  while (rejections < options.patience && !unused.empty()) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    // Sites are in id order, so position order breaks load ties by id.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return current.loads[a] < current.loads[b];
    });
    const std::size_t moves = std::min({batch, order.size(), unused.size()});
    trial = current.sites;
    for (std::size_t t = 0; t < moves; ++t) {
      const std::size_t r = t + static_cast<std::size_t>(rng.below(unused.size() - t));
      std::swap(unused[t], unused[r]);
      trial[order[t]] = unused[t];
    }
    const auto score = eval.run(trial);
    if (score.covered > current.covered_population && score.max_load <= options.cap.max_load) {
      for (std::size_t t = 0; t < moves; ++t) unused[t] = current.sites[order[t]];
      current = assign_demand(matrix, trial);
      rejections = 0;
    } else {
      ++rejections;
    }
  }
  return current;
}

NetworkPlan rearrange(const CoverageMatrix& matrix, const RearrangeOptions& options,
                      std::span<const std::size_t> candidates) {
  RandomSearchOptions search;
  search.network_size = options.network_size;
  search.samples = options.samples;
  search.cap = options.cap;
  search.seed = options.seed;
  const auto start = random_search(matrix, search, candidates);

  ImproveOptions improve;
  improve.cap = options.cap;
  improve.seed = options.seed;
  improve.patience = options.patience;
  improve.batch = options.batch;
  return iterative_improve(start.plan, matrix, improve, candidates);
}

std::vector<CandidateSite> facility_candidates(std::span<const FacilitySite> facilities) {
  std::vector<CandidateSite> out;
  out.reserve(facilities.size());
  for (const auto& f : facilities) out.push_back({f.id, f.point, f.state, std::nullopt});
  return out;
}

std::vector<StateResult> optimize_states(std::span<const DemandPoint> demand,
                                         std::span<const FacilitySite> facilities,
                                         const CoverageMatrix& matrix,
                                         const CoverageMatrix& facility_disks,
                                         const StateOptions& options) {
  if (matrix.demand_count() != demand.size() || facility_disks.demand_count() != demand.size()) {
    throw InvalidInput("optimize_states: matrices were not built over this demand set");
  }
  if (facility_disks.candidate_count() != facilities.size()) {
    throw InvalidInput("optimize_states: facility matrix does not match the facility list");
  }
  const std::size_t nd = demand.size();

  std::vector<std::uint32_t> cover_count(nd, 0);
  for (std::size_t f = 0; f < facilities.size(); ++f) {
    for (std::uint32_t d : facility_disks.demand_of(f)) ++cover_count[d];
  }
  CoveredMask baseline(nd, 0);
  Persons baseline_total = 0;
  for (std::size_t d = 0; d < nd; ++d) {
    if (cover_count[d] > 0) {
      baseline[d] = 1;
      baseline_total += demand[d].weight;
    }
  }

  std::set<std::string> states;
  for (const auto& d : demand) states.insert(d.state);
  for (const auto& f : facilities) states.insert(f.state);

  std::vector<StateResult> results;
  for (const auto& state : states) {
    StateResult r;
    r.state = state;
    for (std::size_t d = 0; d < nd; ++d) {
      if (demand[d].state == state && baseline[d]) r.currently_covered += demand[d].weight;
    }
    std::vector<std::size_t> own_facilities;
    for (std::size_t f = 0; f < facilities.size(); ++f) {
      if (facilities[f].state == state) own_facilities.push_back(f);
    }
    r.existing_sites = own_facilities.size();

    if (options.mode != StateMode::rearrange) {
      const int k = options.mode == StateMode::add_one ? 1 : options.k;
      const auto pool =
          eligible_candidates(matrix, baseline, Scope::of_state(state), options.policy);
      if (!pool.empty()) {
        r.placements = greedy_add(matrix, baseline, k, pool);
        for (const auto& p : r.placements) r.gain += p.marginal_gain;
      }
      results.push_back(std::move(r));
      continue;
    }

    const auto pool =
        eligible_candidates(matrix, baseline, Scope::of_state(state), CandidatePolicy::all);
    const std::size_t size = std::min(own_facilities.size(), pool.size());
    if (size == 0) {
      results.push_back(std::move(r));
      continue;
    }
    RearrangeOptions ro = options.rearrange;
    ro.network_size = size;
    ro.seed = mix_seed(options.rearrange.seed, fnv1a(state));
    NetworkPlan plan;
    try {
      plan = rearrange(matrix, ro, pool);
    } catch (const std::runtime_error&) {
      // No capacity-valid network in this state; keep the current one.
      results.push_back(std::move(r));
      continue;
    }
    std::vector<std::uint32_t> count = cover_count;
    for (std::size_t f : own_facilities) {
      for (std::uint32_t d : facility_disks.demand_of(f)) --count[d];
    }
    for (std::size_t c : plan.sites) {
      for (std::uint32_t d : matrix.demand_of(c)) ++count[d];
    }
    Persons total = 0;
    for (std::size_t d = 0; d < nd; ++d) {
      if (count[d] > 0) total += demand[d].weight;
    }
    if (total > baseline_total) {
      r.gain = total - baseline_total;
      r.plan = std::move(plan);
    }
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace coveropt

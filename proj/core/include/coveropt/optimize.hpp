#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coveropt/coverage.hpp"
#include "coveropt/dataset.hpp"

namespace coveropt {

// Per-demand flag, 1 when the demand point is already covered.
using CoveredMask = std::vector<std::uint8_t>;

inline constexpr Persons kDefaultCapacity = 61725;
inline constexpr std::size_t kDefaultSamples = 200000;
inline constexpr std::size_t kDefaultPatience = 1000;

struct CapacityConstraint {
  Persons max_load = kDefaultCapacity;
};

struct Scope {
  enum class Kind { nation, state };
  Kind kind = Kind::nation;
  std::string state;  // used when kind == state

  static Scope nation() { return {}; }
  static Scope of_state(std::string code) { return {Kind::state, std::move(code)}; }
};

enum class CandidatePolicy {
  underserved,  // centroids of demand points not covered by the baseline
  all,          // every candidate in scope
};

/// A set of candidate sites with its nearest-site assignment.
///
/// `sites` holds candidate indices into the CoverageMatrix, ordered by
/// candidate id. Every demand point within the radius of at least one site is
/// assigned to the nearest such site (ties by smallest id); `loads[i]` is the
/// assigned weight of `sites[i]` and covered_population their sum.
struct NetworkPlan {
  std::vector<std::size_t> sites;
  std::vector<Persons> loads;
  std::vector<std::int32_t> assignment;  // per demand: position in `sites`, or -1
  Persons covered_population = 0;

  Persons max_load() const;
  bool within(const CapacityConstraint& cap) const { return max_load() <= cap.max_load; }

  friend bool operator==(const NetworkPlan&, const NetworkPlan&) = default;
};

// Builds and evaluates a plan over the given candidate indices (any order,
// no duplicates).
NetworkPlan assign_demand(const CoverageMatrix& matrix, std::span<const std::size_t> sites);

// Candidate indices eligible under scope and policy, in ascending id order.
// The underserved policy only admits candidates that sit on a demand point.
std::vector<std::size_t> eligible_candidates(const CoverageMatrix& matrix,
                                             const CoveredMask& baseline, const Scope& scope,
                                             CandidatePolicy policy);

// eligible_candidates, except that an empty underserved pool (everything is
// already covered) falls back to every candidate in scope, where each pick
// gains 0.
std::vector<std::size_t> greedy_pool(const CoverageMatrix& matrix, const CoveredMask& baseline,
                                     const Scope& scope, CandidatePolicy policy);

struct Placement {
  std::size_t candidate = 0;
  Persons marginal_gain = 0;

  friend bool operator==(const Placement&, const Placement&) = default;
};

/// Greedy maximal-coverage placement of k new sites on top of `baseline`.
///
/// Each step takes the candidate that covers the most not-yet-covered weight,
/// ties going to the smallest candidate id. Candidates may be picked with zero
/// gain only when every remaining gain is zero. Evaluation is lazy (stale
/// gains are upper bounds under submodularity), which does not change the
/// selected sequence.
std::vector<Placement> greedy_add(const CoverageMatrix& matrix, const CoveredMask& baseline,
                                  int k, std::span<const std::size_t> candidates);

std::vector<Placement> greedy_add(const CoverageMatrix& matrix, const CoveredMask& baseline,
                                  int k, const Scope& scope,
                                  CandidatePolicy policy = CandidatePolicy::underserved);

struct SubsetResult {
  std::vector<std::size_t> sites;  // ascending id order
  Persons gain = 0;
};

inline constexpr double kBruteForceLimit = 1e7;

// Exhaustive search over all k-subsets of `candidates` for the largest newly
// covered weight; ties go to the lexicographically smallest id set. Throws
// InvalidInput when C(n, k) exceeds kBruteForceLimit.
SubsetResult brute_force_optimal(const CoverageMatrix& matrix, const CoveredMask& baseline,
                                 int k, std::span<const std::size_t> candidates);

struct RandomSearchOptions {
  std::size_t network_size = 0;
  std::size_t samples = kDefaultSamples;
  CapacityConstraint cap;
  std::uint64_t seed = 0;
};

struct RandomSearchResult {
  NetworkPlan plan;
  std::size_t valid_networks = 0;
  std::size_t attempts = 0;
};

/// Draws `samples` cap-valid random networks of `network_size` distinct
/// candidates and keeps the one covering the most weight (first found on
/// ties). Networks that break the cap are redrawn, up to 10 x samples
/// attempts in total. Attempt i is generated from (seed, i) alone, so the
/// result does not depend on the thread count. An empty `candidates` span
/// means every candidate in the matrix.
///
/// Throws InvalidInput on a zero size, a size above the candidate count, or
/// zero samples, and std::runtime_error when no valid network is found.
RandomSearchResult random_search(const CoverageMatrix& matrix, const RandomSearchOptions& options,
                                 std::span<const std::size_t> candidates = {});

struct ImproveOptions {
  CapacityConstraint cap;
  std::uint64_t seed = 0;
  std::size_t patience = kDefaultPatience;
  std::size_t batch = 1;  // lowest-load sites moved per step
};

/// Local search over a cap-valid plan: move the lowest-load site(s) to random
/// unused candidates, keep the move only if coverage strictly rises and the
/// cap still holds, and stop after `patience` consecutive rejections.
NetworkPlan iterative_improve(const NetworkPlan& plan, const CoverageMatrix& matrix,
                              const ImproveOptions& options,
                              std::span<const std::size_t> candidates = {});

struct RearrangeOptions {
  std::size_t network_size = 0;
  std::size_t samples = kDefaultSamples;
  std::size_t patience = kDefaultPatience;
  std::size_t batch = 1;
  CapacityConstraint cap;
  std::uint64_t seed = 0;
};

// random_search followed by iterative_improve.
NetworkPlan rearrange(const CoverageMatrix& matrix, const RearrangeOptions& options,
                      std::span<const std::size_t> candidates = {});

enum class StateMode { add_one, add_k, rearrange };

struct StateOptions {
  StateMode mode = StateMode::add_one;
  int k = 1;
  CandidatePolicy policy = CandidatePolicy::underserved;
  RearrangeOptions rearrange;  // network_size is taken per state
};

struct StateResult {
  std::string state;
  Persons currently_covered = 0;  // baseline-covered weight of the state's demand
  std::size_t existing_sites = 0;
  Persons gain = 0;
  std::vector<Placement> placements;  // add modes
  std::optional<NetworkPlan> plan;    // rearrange mode, when it beats the current network
};

/// Runs the chosen optimizer once per state, with candidates restricted to the
/// state's demand centroids. Gains count demand anywhere that becomes covered,
/// whichever state it lies in. For rearrangement the state's existing
/// facilities are replaced by the plan while other states' facilities stay;
/// a plan that does not beat the current network is not adopted (gain 0).
///
/// `matrix` must be CoverageMatrix::over_demand(demand, R) and
/// `facility_disks` CoverageMatrix::build over the facilities at the same R.
std::vector<StateResult> optimize_states(std::span<const DemandPoint> demand,
                                         std::span<const FacilitySite> facilities,
                                         const CoverageMatrix& matrix,
                                         const CoverageMatrix& facility_disks,
                                         const StateOptions& options);

// Facilities as matrix candidates (no demand index).
std::vector<CandidateSite> facility_candidates(std::span<const FacilitySite> facilities);

}  // namespace coveropt

#pragma once

#include <cstdint>
#include <vector>

#include "coveropt/dataset.hpp"

namespace coveropt {

struct SynthOptions {
  std::size_t demand_points = 33000;
  std::size_t facilities = 2138;
  std::size_t cities = 40;
  double urban_share = 0.6;         // demand points drawn around cities
  double colocated_share = 0.9;     // facilities drawn around cities
  double duplicate_share = 0.0;     // extra near-duplicate facility rows
  std::uint64_t seed = 0;
};

struct SynthDataset {
  std::vector<DemandPoint> demand;
  std::vector<FacilitySite> facilities;
  std::vector<ZctaFragment> fragments;  // cbsa and state kinds
};

/// Contiguous-US-shaped toy data: demand concentrated around a few dozen
/// heavy-tailed "cities" with facilities mostly placed in the same cities in
/// proportion to their population, plus a rural background. States are a
/// 6 x 8 grid of the bounding box; each city is a cbsa region.
SynthDataset synthesize(const SynthOptions& options);

}  // namespace coveropt

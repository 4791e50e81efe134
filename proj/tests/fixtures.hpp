#pragma once

// Hand-built fixtures with known answers.

#include <string>
#include <vector>

#include "coveropt/coveropt.hpp"

namespace coveropt::testing {

// Eight regions, each made of two demand points at distances (d - 1, d + 1)
// with equal weight, so the weighted mean distance is d and the population
// is the sum of both weights.
//
//   region  mean d  population
//   R1       3.0     4300
//   R2      44.5     2500
//   R3      12.0      400
//   R4      51.0     5200   <- planted
//   R5       8.5      800
//   R6      60.0     6100   <- planted
//   R7      20.0     1200
//   R8      47.0     3900
//
// Sorted means: 3, 8.5, 12, 20, 44.5, 47, 51, 60. Type 7 Q3 sits at
// 1-based position 1 + 0.75 * 7 = 6.25: 47 + 0.25 * (51 - 47) = 48.
// Sorted populations: 400, 800, 1200, 2500, 3900, 4300, 5200, 6100.
// Q3 = 4300 + 0.25 * (5200 - 4300) = 4525.
// Strictly above both: R4 and R6. R1 has a high population but a short
// distance; R8 is far but small.
struct QuartileFixture {
  std::vector<DemandPoint> demand;
  CoverageField field;
  RegionMap regions;
  double distance_q3 = 48.0;
  double population_q3 = 4525.0;
  std::vector<std::string> planted{"R4", "R6"};
};

inline QuartileFixture quartile_fixture() {
  struct Row {
    const char* id;
    double mean;
    Persons population;
  };
  const Row rows[] = {{"R1", 3.0, 4300},  {"R2", 44.5, 2500}, {"R3", 12.0, 400},
                      {"R4", 51.0, 5200}, {"R5", 8.5, 800},   {"R6", 60.0, 6100},
                      {"R7", 20.0, 1200}, {"R8", 47.0, 3900}};
  QuartileFixture fx;
  fx.field.radius_miles = kDefaultRadiusMiles;
  int z = 10000;
  for (const auto& r : rows) {
    for (double d : {r.mean - 1.0, r.mean + 1.0}) {
      const std::string zcta = std::to_string(z++);
      fx.demand.push_back({zcta, {35.0, -90.0}, r.population / 2, std::nullopt, "TN"});
      fx.field.records.push_back({zcta, "F1", d, d <= fx.field.radius_miles});
      fx.regions[zcta] = r.id;
    }
  }
  return fx;
}

}  // namespace coveropt::testing

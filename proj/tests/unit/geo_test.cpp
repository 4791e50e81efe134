#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "support.hpp"

namespace coveropt {
namespace {

using testing::random_globe;
using testing::random_points;
using testing::scan_nearest;
using testing::scan_within;

// Spherical law of cosines, an independent formula for the same arc.
double cosine_law_miles(const GeoPoint& a, const GeoPoint& b) {
  const double r = M_PI / 180.0;
  const double c = std::sin(a.lat * r) * std::sin(b.lat * r) +
                   std::cos(a.lat * r) * std::cos(b.lat * r) * std::cos((b.lon - a.lon) * r);
  return kEarthRadiusMiles * std::acos(std::clamp(c, -1.0, 1.0));
}

std::vector<IndexEntry> entries_of(std::span<const GeoPoint> pts, const char* prefix = "E") {
  std::vector<IndexEntry> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out.push_back({prefix + std::to_string(100000 + i), pts[i]});
  }
  return out;
}

TEST(Haversine, IdentityIsZero) {
  EXPECT_EQ(haversine_miles({10, 20}, {10, 20}), 0.0);
}

TEST(Haversine, OneDegreeOfLongitudeAtEquator) {
  const double closed_form = M_PI / 180.0 * kEarthRadiusMiles;
  EXPECT_NEAR(haversine_miles({0, 0}, {0, 1}), 69.09, 0.05);
  EXPECT_NEAR(haversine_miles({0, 0}, {0, 1}), closed_form, 1e-9);
}

TEST(Haversine, Antipodal) {
  EXPECT_NEAR(haversine_miles({0, 0}, {0, 180}), 12436.8, 1.0);
  EXPECT_NEAR(haversine_miles({0, 0}, {0, 180}), M_PI * kEarthRadiusMiles, 1e-6);
}

TEST(Haversine, AgreesWithCosineLawAwayFromTinyArcs) {
  std::mt19937_64 rng(7);
  const auto a = random_globe(rng, 2000);
  const auto b = random_globe(rng, 2000);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double h = haversine_miles(a[i], b[i]);
    if (h < 10.0) continue;
    EXPECT_NEAR(h, cosine_law_miles(a[i], b[i]), 1e-6 * std::max(1.0, h));
  }
}

TEST(Haversine, SymmetricBitForBit) {
  std::mt19937_64 rng(11);
  const auto a = random_globe(rng, 10000);
  const auto b = random_globe(rng, 10000);
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(haversine_miles(a[i], b[i]), haversine_miles(b[i], a[i]));
  }
}

TEST(Haversine, SampledTriangleInequality) {
  std::mt19937_64 rng(13);
  const auto a = random_globe(rng, 3000);
  const auto b = random_globe(rng, 3000);
  const auto c = random_globe(rng, 3000);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ab = haversine_miles(a[i], b[i]);
    const double bc = haversine_miles(b[i], c[i]);
    const double ac = haversine_miles(a[i], c[i]);
    EXPECT_LE(ac, (ab + bc) * (1 + 1e-9) + 1e-9);
  }
}

TEST(Haversine, RejectsBadCoordinates) {
  EXPECT_THROW(haversine_miles({91, 0}, {0, 0}), InvalidInput);
  EXPECT_THROW(haversine_miles({0, 0}, {0, -180.5}), InvalidInput);
  EXPECT_THROW(haversine_miles({std::nan(""), 0}, {0, 0}), InvalidInput);
  EXPECT_THROW(haversine_miles({0, std::numeric_limits<double>::infinity()}, {0, 0}),
               InvalidInput);
  EXPECT_NO_THROW(haversine_miles({90, 180}, {-90, -180}));
}

TEST(SpatialIndex, EmptyIndexAnswersNothing) {
  const auto idx = SpatialIndex::build({});
  EXPECT_TRUE(idx.empty());
  EXPECT_FALSE(idx.nearest({1, 2}).has_value());
  EXPECT_TRUE(idx.within_radius({1, 2}, 100).empty());
}

TEST(SpatialIndex, SingletonIsAlwaysNearest) {
  const std::vector<IndexEntry> e{{"only", {40, -100}}};
  const auto idx = SpatialIndex::build(e);
  for (GeoPoint q : {GeoPoint{40, -100}, GeoPoint{-60, 170}, GeoPoint{90, 0}}) {
    const auto n = idx.nearest(q);
    ASSERT_TRUE(n);
    EXPECT_EQ(n->index, 0u);
    EXPECT_EQ(n->miles, haversine_miles(q, e[0].point));
  }
}

TEST(SpatialIndex, NearestOfTwo) {
  const std::vector<IndexEntry> e{{"A", {0, 0}}, {"B", {0, 2}}};
  const auto n = SpatialIndex::build(e).nearest({0, 0.5});
  ASSERT_TRUE(n);
  EXPECT_EQ(n->index, 0u);
  EXPECT_NEAR(n->miles, 34.5, 0.1);
}

TEST(SpatialIndex, SymmetricTieGoesToSmallerId) {
  // B listed first so insertion order cannot decide the tie.
  const std::vector<IndexEntry> e{{"B", {0, -1}}, {"A", {0, 1}}};
  const auto idx = SpatialIndex::build(e);
  const auto n = idx.nearest({0, 0});
  ASSERT_TRUE(n);
  EXPECT_EQ(idx.id(n->index), "A");
  const auto w = idx.within_radius({0, 0}, 100);
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(idx.id(w[0].index), "A");
}

TEST(SpatialIndex, DuplicateIdRejected) {
  const std::vector<IndexEntry> e{{"A", {0, 0}}, {"A", {1, 1}}};
  EXPECT_THROW(SpatialIndex::build(e), InvalidInput);
}

TEST(SpatialIndex, InvalidPointRejected) {
  const std::vector<IndexEntry> e{{"A", {0, 200}}};
  EXPECT_THROW(SpatialIndex::build(e), InvalidInput);
}

TEST(SpatialIndex, ZeroRadiusReturnsExactMatchOnly) {
  const std::vector<IndexEntry> e{{"A", {10, 10}}, {"B", {10, 10.0001}}};
  const auto w = SpatialIndex::build(e).within_radius({10, 10}, 0.0);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0].index, 0u);
  EXPECT_EQ(w[0].miles, 0.0);
}

TEST(SpatialIndex, EntryExactlyAtRadiusIncluded) {
  const std::vector<IndexEntry> e{{"A", {0, 0}}, {"B", {0, 1}}};
  const double r = haversine_miles({0, 0}, {0, 1});
  const auto w = SpatialIndex::build(e).within_radius({0, 0}, r);
  EXPECT_EQ(w.size(), 2u);
}

TEST(SpatialIndex, NegativeRadiusRejected) {
  const auto idx = SpatialIndex::build({});
  EXPECT_THROW(idx.within_radius({0, 0}, -1.0), InvalidInput);
}

TEST(SpatialIndex, NearestMatchesLinearScanOnRandomEntries) {
  std::mt19937_64 rng(21);
  const auto pts = random_points(rng, 1000, 38, -97, 12, 28);
  const auto e = entries_of(pts);
  const auto idx = SpatialIndex::build(e);
  const auto queries = random_points(rng, 1000, 38, -97, 14, 30);
  for (const auto& q : queries) {
    const auto got = idx.nearest(q);
    const auto want = scan_nearest(e, q);
    ASSERT_TRUE(got && want);
    ASSERT_EQ(got->index, want->first);
    ASSERT_EQ(got->miles, want->second);
  }
}

TEST(SpatialIndex, WithinRadiusMatchesLinearScan) {
  std::mt19937_64 rng(22);
  const auto pts = random_points(rng, 1000, 40, -100, 2, 2);
  const auto e = entries_of(pts);
  const auto idx = SpatialIndex::build(e);
  for (const auto& q : random_points(rng, 1000, 40, -100, 2.5, 2.5)) {
    ASSERT_EQ(idx.within_radius(q, 12.0), scan_within(e, q, 12.0));
  }
}

TEST(SpatialIndex, GlobalQueriesIncludingPolesAndDateline) {
  std::mt19937_64 rng(23);
  auto pts = random_globe(rng, 800);
  pts.push_back({90, 0});
  pts.push_back({-90, 0});
  pts.push_back({0, 180});
  pts.push_back({0, -180});
  const auto e = entries_of(pts);
  const auto idx = SpatialIndex::build(e);
  auto queries = random_globe(rng, 500);
  queries.push_back({89.9999, 45});
  queries.push_back({0, 179.9999});
  for (const auto& q : queries) {
    const auto got = idx.nearest(q);
    const auto want = scan_nearest(e, q);
    ASSERT_EQ(got->index, want->first);
    ASSERT_EQ(idx.within_radius(q, 500.0), scan_within(e, q, 500.0));
  }
}

TEST(SpatialIndex, ManyCoincidentPoints) {
  std::vector<GeoPoint> pts(300, GeoPoint{35, -80});
  const auto e = entries_of(pts);
  const auto idx = SpatialIndex::build(e);
  const auto n = idx.nearest({35.01, -80.01});
  EXPECT_EQ(n->index, 0u);
  EXPECT_EQ(idx.within_radius({35, -80}, 0.0).size(), 300u);
}

TEST(SpatialIndex, QueriesAreDeterministic) {
  std::mt19937_64 rng(24);
  const auto e = entries_of(random_points(rng, 500, 30, -90, 5, 5));
  const auto a = SpatialIndex::build(e);
  const auto b = SpatialIndex::build(e);
  for (const auto& q : random_points(rng, 200, 30, -90, 5, 5)) {
    EXPECT_EQ(a.nearest(q), b.nearest(q));
    EXPECT_EQ(a.within_radius(q, 30), b.within_radius(q, 30));
  }
}

}  // namespace
}  // namespace coveropt

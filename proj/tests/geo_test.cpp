#include "terrarank/geo.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "test_util.hpp"

namespace terrarank {
namespace {

using testing::kSurveyDestination;
using testing::kSurveyOrigin;

TEST(GeoPointTest, NormalizesLongitude) {
  EXPECT_DOUBLE_EQ(GeoPoint(0, 180).lng(), -180.0);
  EXPECT_DOUBLE_EQ(GeoPoint(0, 190).lng(), -170.0);
  EXPECT_DOUBLE_EQ(GeoPoint(0, -190).lng(), 170.0);
  EXPECT_DOUBLE_EQ(GeoPoint(0, 540).lng(), -180.0);
  EXPECT_DOUBLE_EQ(GeoPoint(10, 135.5).lng(), 135.5);
}

TEST(GeoPointTest, RejectsLatitudeOutOfRange) {
  EXPECT_THROW(GeoPoint(90.0001, 0), ArgumentError);
  EXPECT_THROW(GeoPoint(-91, 0), ArgumentError);
  EXPECT_THROW(GeoPoint(std::nan(""), 0), ArgumentError);
  EXPECT_NO_THROW(GeoPoint(90, 0));
  EXPECT_NO_THROW(GeoPoint(-90, 0));
}

TEST(RouteTest, CollapsesConsecutiveDuplicates) {
  const GeoPoint a(1, 1), b(1, 2);
  const Route r("r", {{a, 5.0}, {a, 6.0}, {b, std::nullopt}, {b, 1.0}});
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r.front().elevation, 5.0);
  EXPECT_FALSE(r.back().elevation.has_value());
}

TEST(RouteTest, NeedsTwoDistinctPoints) {
  const GeoPoint a(1, 1);
  EXPECT_THROW(Route("r", {{a, std::nullopt}}), ArgumentError);
  EXPECT_THROW(Route("r", {{a, std::nullopt}, {a, std::nullopt}}), ArgumentError);
  EXPECT_THROW(Route("r", {{a, std::nan("")}, {GeoPoint(2, 2), 1.0}}), ArgumentError);
}

TEST(HaversineTest, IdenticalPointsAreZero) {
  EXPECT_EQ(haversine_distance(kSurveyOrigin, kSurveyOrigin), 0.0);
}

TEST(HaversineTest, SurveyEndpointPair) {
  // Frozen from a 40-digit evaluation of both haversine and the law of cosines.
  constexpr double kExpected = 1966.962372773195;
  const double d = haversine_distance(kSurveyOrigin, kSurveyDestination);
  EXPECT_NEAR(d, kExpected, 1e-6);
  EXPECT_NEAR(d, testing::law_of_cosines_distance(kSurveyOrigin, kSurveyDestination), 0.01);
}

TEST(HaversineTest, AntipodalOnEquator) {
  EXPECT_NEAR(haversine_distance(GeoPoint(0, 0), GeoPoint(0, 180)), 20015114.442035924, 1e-6);
  EXPECT_NEAR(haversine_distance(GeoPoint(0, 0), GeoPoint(0, 180)), std::numbers::pi * kEarthRadiusM, 1e-6);
}

TEST(HaversineTest, SymmetricNonNegativeAndZeroOnlyAtSamePoint) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const auto p = testing::random_point(rng);
    const auto q = testing::random_point(rng);
    EXPECT_EQ(haversine_distance(p, q), haversine_distance(q, p));
    EXPECT_GT(haversine_distance(p, q), 0.0);
  }
  EXPECT_EQ(haversine_distance(GeoPoint(3, 180), GeoPoint(3, -180)), 0.0);
}

TEST(HaversineTest, TriangleInequality) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const auto p = testing::random_point(rng);
    const auto q = testing::random_point(rng);
    const auto r = testing::random_point(rng);
    EXPECT_LE(haversine_distance(p, r), haversine_distance(p, q) + haversine_distance(q, r) + 1e-6);
  }
}

TEST(PathLengthTest, SingleSegmentIsHaversine) {
  const auto r = Route::from_positions("r", std::vector{kSurveyOrigin, kSurveyDestination});
  EXPECT_EQ(path_length(r), haversine_distance(kSurveyOrigin, kSurveyDestination));
}

TEST(PathLengthTest, MidpointSubdivisionPreservesLength) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto r = testing::random_route(rng, GeoPoint(34.86, 135.68), 6, 0.05);
    auto pts = r.positions();
    const std::size_t j = std::uniform_int_distribution<std::size_t>(0, pts.size() - 2)(rng);
    pts.insert(pts.begin() + static_cast<std::ptrdiff_t>(j) + 1, interpolate_great_circle(pts[j], pts[j + 1], 0.5));
    const auto split = Route::from_positions("r", pts);
    EXPECT_NEAR(path_length(split) / path_length(r), 1.0, 1e-6);
  }
}

TEST(ResampleTest, RejectsNonPositiveInterval) {
  const auto r = Route::from_positions("r", std::vector{kSurveyOrigin, kSurveyDestination});
  EXPECT_THROW(resample_route(r, 0.0), ArgumentError);
  EXPECT_THROW(resample_route(r, -5.0), ArgumentError);
}

TEST(ResampleTest, AlreadyDenseRouteIsUnchanged) {
  const GeoPoint a(34.86, 135.68);
  const GeoPoint b(34.8601, 135.68);  // ~11 m
  const Route r("r", {{a, 3.0}, {b, 4.0}});
  EXPECT_EQ(resample_route(r, 30.0), r);
}

TEST(ResampleTest, HundredMetersAtThirtyGivesFourEqualSegments) {
  // 100 m due north along a meridian.
  const GeoPoint a(10.0, 20.0);
  const GeoPoint b(10.0 + 100.0 / kEarthRadiusM * 180.0 / std::numbers::pi, 20.0);
  ASSERT_NEAR(haversine_distance(a, b), 100.0, 1e-6);
  const auto out = resample_route(Route("r", {{a, 1.0}, {b, 2.0}}), 30.0);
  ASSERT_EQ(out.size(), 5u);
  const auto pts = out.points();
  for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
    EXPECT_NEAR(haversine_distance(pts[j].position, pts[j + 1].position), 25.0, 1e-6);
  }
  EXPECT_EQ(pts.front().elevation, 1.0);
  EXPECT_EQ(pts.back().elevation, 2.0);
  for (std::size_t j = 1; j + 1 < pts.size(); ++j) EXPECT_FALSE(pts[j].elevation.has_value());
}

TEST(ResampleTest, PropertiesOnRandomRoutes) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto r = testing::random_route(rng, GeoPoint(-33.9, 18.4), 8, 0.02);
    const double interval = std::uniform_real_distribution<double>(5.0, 400.0)(rng);
    const auto out = resample_route(r, interval);
    EXPECT_NEAR(path_length(out) / path_length(r), 1.0, 1e-6);
    const auto pts = out.points();
    for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
      EXPECT_LE(haversine_distance(pts[j].position, pts[j + 1].position), interval + 1e-6);
    }
    // Original points appear in order.
    std::size_t cursor = 0;
    for (const auto& orig : r.points()) {
      while (cursor < pts.size() && !(pts[cursor].position == orig.position)) ++cursor;
      ASSERT_LT(cursor, pts.size());
    }
  }
}

}  // namespace
}  // namespace terrarank

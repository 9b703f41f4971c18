#include "terrarank/weighting.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cstring>
#include <numeric>
#include <random>
#include <vector>

#include "test_util.hpp"

namespace terrarank {
namespace {

WeightSpec slope(double alpha, GradeMode mode = GradeMode::absolute) {
  WeightSpec s;
  s.alpha = alpha;
  s.grade_mode = mode;
  return s;
}

Route with_elevations(const Route& r, std::mt19937_64& rng, double spread) {
  std::uniform_real_distribution<double> e(0, spread);
  std::vector<RoutePoint> pts;
  for (const auto& p : r.points()) pts.push_back({p.position, e(rng)});
  return Route(r.id(), pts);
}

Route flat(const Route& r, double e) {
  std::vector<RoutePoint> pts;
  for (const auto& p : r.points()) pts.push_back({p.position, e});
  return Route(r.id(), pts);
}

bool bitwise_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

TEST(SlopeWeightTest, FlatIsOne) {
  for (double alpha : {0.0, 1.0, 10.0, 1e6}) EXPECT_EQ(slope_weight(12.0, 12.0, 50.0, slope(alpha)), 1.0);
}

TEST(SlopeWeightTest, DirectFormula) {
  EXPECT_DOUBLE_EQ(slope_weight(0.0, 5.0, 100.0, slope(10)), 1.5);
  EXPECT_DOUBLE_EQ(slope_weight(5.0, 0.0, 100.0, slope(10)), 1.5);
}

TEST(SlopeWeightTest, UphillOnlyClampsDescents) {
  EXPECT_EQ(slope_weight(5.0, 0.0, 100.0, slope(10, GradeMode::uphill_only)), 1.0);
  EXPECT_DOUBLE_EQ(slope_weight(0.0, 5.0, 100.0, slope(10, GradeMode::uphill_only)), 1.5);
}

TEST(SlopeWeightTest, ZeroLengthSegmentWeighsOne) { EXPECT_EQ(slope_weight(0.0, 50.0, 0.0, slope(10)), 1.0); }

TEST(WeightSpecTest, RejectsNegativeOrNonFiniteAlpha) {
  const auto r = Route("r", {{GeoPoint(0, 0), 1.0}, {GeoPoint(0, 0.001), 2.0}});
  EXPECT_THROW(weighted_distance(r, slope(-1)), ArgumentError);
  EXPECT_THROW(weighted_distance(r, slope(std::numeric_limits<double>::infinity())), ArgumentError);
}

TEST(WeightedDistanceTest, UnitFactorIsPathLengthBitForBit) {
  std::mt19937_64 rng(1);
  WeightSpec unit;
  unit.factor = WeightFactor::unit;
  for (int i = 0; i < 100; ++i) {
    const auto r = testing::random_route(rng, GeoPoint(34.86, 135.68), 2 + i % 30);
    EXPECT_TRUE(bitwise_equal(weighted_distance(r, unit), path_length(r)));
  }
}

TEST(WeightedDistanceTest, FlatRouteEqualsPathLength) {
  std::mt19937_64 rng(2);
  for (double alpha : {0.0, 3.0, 10.0, 250.0}) {
    const auto r = flat(testing::random_route(rng, GeoPoint(47.0, 8.0), 12), 417.0);
    EXPECT_NEAR(weighted_distance(r, slope(alpha)) / path_length(r), 1.0, 1e-9);
  }
}

TEST(WeightedDistanceTest, MissingElevationNamesPoint) {
  const Route r("r", {{GeoPoint(0, 0), 1.0}, {GeoPoint(0, 0.001), std::nullopt}, {GeoPoint(0, 0.002), 2.0}});
  try {
    weighted_distance(r, slope(10));
    FAIL();
  } catch (const AnnotationError& e) {
    EXPECT_EQ(e.point_index(), 1u);
  }
  WeightSpec unit;
  unit.factor = WeightFactor::unit;
  EXPECT_NO_THROW(weighted_distance(r, unit));
}

TEST(WeightedDistanceTest, StrictlyIncreasingInAlpha) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto r = with_elevations(testing::random_route(rng, GeoPoint(34.86, 135.68), 10), rng, 40);
    double prev = weighted_distance(r, slope(0));
    for (double alpha = 0.5; alpha <= 20; alpha += 0.5) {
      const double wd = weighted_distance(r, slope(alpha));
      EXPECT_GT(wd, prev);
      prev = wd;
    }
  }
}

TEST(WeightedDistanceTest, NeverBelowPathLength) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 100; ++i) {
    const auto r = with_elevations(testing::random_route(rng, GeoPoint(-22.9, -43.2), 15), rng, 100);
    EXPECT_GE(weighted_distance(r, slope(7, i % 2 ? GradeMode::absolute : GradeMode::uphill_only)), path_length(r));
  }
}

TEST(WeightedDistanceTest, AdditiveAcrossSplit) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const auto r = with_elevations(testing::random_route(rng, GeoPoint(34.86, 135.68), 12), rng, 60);
    const auto pts = r.points();
    const std::size_t cut = std::uniform_int_distribution<std::size_t>(1, pts.size() - 2)(rng);
    const Route head("h", {pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(cut) + 1});
    const Route tail("t", {pts.begin() + static_cast<std::ptrdiff_t>(cut), pts.end()});
    const double whole = weighted_distance(r, slope(10));
    EXPECT_NEAR((weighted_distance(head, slope(10)) + weighted_distance(tail, slope(10))) / whole, 1.0, 1e-9);
  }
}

TEST(WeightedDistanceTest, UniformWeightScalingPreservesArgsort) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<SegmentWeight>> routes;
    for (int k = 0; k < 4; ++k) {
      const auto r = with_elevations(testing::random_route(rng, GeoPoint(34.86, 135.68), 10), rng, 50);
      routes.push_back(segment_weights(r, slope(10)));
    }
    const double c = std::uniform_real_distribution<double>(0.01, 100.0)(rng);
    std::vector<double> base, scaled;
    for (const auto& segs : routes) {
      base.push_back(weighted_distance(segs));
      auto s = segs;
      for (auto& seg : s) seg.w *= c;
      scaled.push_back(weighted_distance(s));
      EXPECT_NEAR(scaled.back() / (c * base.back()), 1.0, 1e-12);
    }
    const auto argsort = [](const std::vector<double>& v) {
      std::vector<std::size_t> idx(v.size());
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
      return idx;
    };
    EXPECT_EQ(argsort(base), argsort(scaled));
  }
}

TEST(SegmentWeightsTest, TwoPointFlatRoute) {
  const Route r("r", {{GeoPoint(0, 0), 3.0}, {GeoPoint(0, 0.001), 3.0}});
  const auto segs = segment_weights(r, slope(10));
  ASSERT_EQ(segs.size(), 1u);
  EXPECT_EQ(segs[0].w, 1.0);
  EXPECT_EQ(segs[0].delta_e, 0.0);
}

TEST(SegmentWeightsTest, ClimbThenFlat) {
  const Route r("r", {{GeoPoint(0, 0), 0.0}, {GeoPoint(0, 0.001), 8.0}, {GeoPoint(0, 0.002), 8.0}});
  const auto segs = segment_weights(r, slope(10));
  ASSERT_EQ(segs.size(), 2u);
  EXPECT_GT(segs[0].w, 1.0);
  EXPECT_DOUBLE_EQ(segs[0].w, 1.0 + 10.0 * 8.0 / segs[0].d);
  EXPECT_EQ(segs[0].delta_e, 8.0);
  EXPECT_EQ(segs[1].w, 1.0);
}

TEST(SegmentWeightsTest, ConsistentWithTotals) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 100; ++i) {
    const auto r = with_elevations(testing::random_route(rng, GeoPoint(34.86, 135.68), 20), rng, 30);
    const auto segs = segment_weights(r, slope(10));
    ASSERT_EQ(segs.size(), r.size() - 1);
    double wd = 0, od = 0;
    for (const auto& s : segs) {
      wd += s.w * s.d;
      od += s.d;
    }
    EXPECT_NEAR(wd / weighted_distance(r, slope(10)), 1.0, 1e-9);
    EXPECT_NEAR(od / path_length(r), 1.0, 1e-9);
  }
}

TEST(SegmentWeightsTest, ExternalScoresForTrafficAndRoadQuality) {
  const auto r = Route::from_positions("r", std::vector<GeoPoint>{{0, 0}, {0, 0.001}, {0, 0.002}});
  for (auto factor : {WeightFactor::traffic, WeightFactor::road_quality}) {
    WeightSpec s;
    s.factor = factor;
    s.segment_scores = {2.0, 0.5};
    const auto segs = segment_weights(r, s);
    EXPECT_EQ(segs[0].w, 2.0);
    EXPECT_EQ(segs[1].w, 0.5);
    EXPECT_DOUBLE_EQ(weighted_distance(r, s), 2.0 * segs[0].d + 0.5 * segs[1].d);
    s.segment_scores = {1.0};
    EXPECT_THROW(segment_weights(r, s), ArgumentError);
    s.segment_scores = {1.0, -1.0};
    EXPECT_THROW(segment_weights(r, s), ArgumentError);
  }
}

TEST(WeightedTimeTest, UnitWeightsSumTimes) {
  const std::vector<double> t{10, 20, 30.5};
  const std::vector<double> w{1, 1, 1};
  EXPECT_EQ(weighted_time(t, w), 60.5);
}

TEST(WeightedTimeTest, DirectFormula) {
  EXPECT_EQ(weighted_time(std::vector<double>{60, 60}, std::vector<double>{1.0, 2.0}), 180.0);
  EXPECT_EQ(weighted_time(std::vector<double>{120}, std::vector<double>{1.5}), 180.0);
}

TEST(WeightedTimeTest, Errors) {
  EXPECT_THROW(weighted_time(std::vector<double>{1, 2}, std::vector<double>{1}), ArgumentError);
  EXPECT_THROW(weighted_time(std::vector<double>{}, std::vector<double>{}), ArgumentError);
  EXPECT_THROW(weighted_time(std::vector<double>{-1}, std::vector<double>{1}), ArgumentError);
}

}  // namespace
}  // namespace terrarank

#pragma once

// Environmental weighting of sub-routes. A route of n+1 points has n
// segments; each carries a length d, a weight w >= 0 and, when elevations are
// known, the signed elevation change across it. The weighted distance is
// sum(w * d), accumulated left to right in point order.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "terrarank/error.hpp"
#include "terrarank/geo.hpp"

namespace terrarank {

enum class WeightFactor { slope, traffic, road_quality, unit };
enum class GradeMode { absolute, uphill_only };

inline constexpr double kDefaultAlpha = 10.0;

struct WeightSpec {
  WeightFactor factor = WeightFactor::slope;
  /// Steepness penalty: a segment with grade g weighs 1 + alpha * g.
  double alpha = kDefaultAlpha;
  GradeMode grade_mode = GradeMode::absolute;
  /// Externally supplied per-segment scores, used as the weights verbatim for
  /// the traffic and road_quality factors.
  std::vector<double> segment_scores;

  void validate() const {
    if (!std::isfinite(alpha) || alpha < 0) throw ArgumentError("alpha must be finite and >= 0");
  }
};

struct SegmentWeight {
  double w;
  double d;
  double delta_e;
};

inline std::string_view to_string(WeightFactor f) {
  switch (f) {
    case WeightFactor::slope: return "slope";
    case WeightFactor::traffic: return "traffic";
    case WeightFactor::road_quality: return "road_quality";
    case WeightFactor::unit: return "unit";
  }
  return "?";
}

inline std::string_view to_string(GradeMode m) {
  return m == GradeMode::absolute ? "absolute" : "uphill_only";
}

inline std::optional<GradeMode> parse_grade_mode(std::string_view s) {
  if (s == "absolute") return GradeMode::absolute;
  if (s == "uphill_only") return GradeMode::uphill_only;
  return std::nullopt;
}

/// 1 + alpha * grade, grade = |rise| / run (absolute) or max(0, rise) / run
/// (uphill_only). Zero-length segments weigh 1.
inline double slope_weight(double e_j, double e_k, double d_jk, const WeightSpec& spec) noexcept {
  if (d_jk <= 0.0) return 1.0;
  const double rise = e_k - e_j;
  const double grade = spec.grade_mode == GradeMode::absolute ? std::abs(rise) / d_jk
                                                              : std::max(0.0, rise) / d_jk;
  return 1.0 + spec.alpha * grade;
}

inline std::vector<SegmentWeight> segment_weights(const Route& route, const WeightSpec& spec) {
  spec.validate();
  const auto pts = route.points();
  const std::size_t n = pts.size() - 1;

  if (spec.factor == WeightFactor::slope) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (!pts[i].elevation) {
        throw AnnotationError("route '" + route.id() + "' point " + std::to_string(i) +
                                  " has no elevation",
                              i);
      }
    }
  }
  if (spec.factor == WeightFactor::traffic || spec.factor == WeightFactor::road_quality) {
    if (spec.segment_scores.size() != n) {
      throw ArgumentError(std::string(to_string(spec.factor)) + " factor needs " + std::to_string(n) +
                          " segment scores, got " + std::to_string(spec.segment_scores.size()));
    }
    for (double s : spec.segment_scores) {
      if (!std::isfinite(s) || s < 0) throw ArgumentError("segment scores must be finite and >= 0");
    }
  }

  std::vector<SegmentWeight> out;
  out.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double d = haversine_distance(pts[j].position, pts[j + 1].position);
    const double delta_e =
        pts[j].elevation && pts[j + 1].elevation ? *pts[j + 1].elevation - *pts[j].elevation : 0.0;
    double w = 1.0;
    switch (spec.factor) {
      case WeightFactor::slope: w = slope_weight(*pts[j].elevation, *pts[j + 1].elevation, d, spec); break;
      case WeightFactor::traffic:
      case WeightFactor::road_quality: w = spec.segment_scores[j]; break;
      case WeightFactor::unit: w = 1.0; break;
    }
    out.push_back({w, d, delta_e});
  }
  return out;
}

inline double weighted_distance(std::span<const SegmentWeight> segments) noexcept {
  double total = 0.0;
  for (const auto& s : segments) total += s.w * s.d;
  return total;
}

inline double weighted_distance(const Route& route, const WeightSpec& spec) {
  return weighted_distance(segment_weights(route, spec));
}

/// sum(w * t) for routes whose cost is time rather than distance.
inline double weighted_time(std::span<const double> segment_times, std::span<const double> weights) {
  if (segment_times.empty()) throw ArgumentError("weighted_time needs at least one segment");
  if (segment_times.size() != weights.size()) {
    throw ArgumentError("weighted_time: " + std::to_string(segment_times.size()) + " times but " +
                        std::to_string(weights.size()) + " weights");
  }
  double total = 0.0;
  for (std::size_t j = 0; j < segment_times.size(); ++j) {
    if (!(segment_times[j] >= 0) || !(weights[j] >= 0)) {
      throw ArgumentError("weighted_time entries must be >= 0");
    }
    total += weights[j] * segment_times[j];
  }
  return total;
}

}  // namespace terrarank

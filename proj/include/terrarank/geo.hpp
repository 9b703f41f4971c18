#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "terrarank/error.hpp"

namespace terrarank {

/// Mean Earth radius in meters.
inline constexpr double kEarthRadiusM = 6371008.8;

namespace detail {
inline constexpr double kDegToRad = std::numbers::pi / 180.0;
inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;

inline double normalize_lng(double lng) {
  double out = std::fmod(lng + 180.0, 360.0);
  if (out < 0) out += 360.0;
  out -= 180.0;
  // fmod can land exactly on +180 through rounding.
  return out >= 180.0 ? -180.0 : out;
}
}  // namespace detail

/// A latitude/longitude position in degrees on the WGS84 sphere.
///
/// Latitude must lie in [-90, 90]; longitude is normalized into [-180, 180).
class GeoPoint {
 public:
  GeoPoint(double lat, double lng) : lat_(lat), lng_(lng) {
    if (!std::isfinite(lat) || lat < -90.0 || lat > 90.0) {
      throw ArgumentError("latitude out of range: " + std::to_string(lat));
    }
    if (!std::isfinite(lng)) {
      throw ArgumentError("longitude is not finite");
    }
    lng_ = detail::normalize_lng(lng);
  }

  double lat() const noexcept { return lat_; }
  double lng() const noexcept { return lng_; }

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

 private:
  double lat_;
  double lng_;
};

/// A route vertex with optional elevation in meters.
struct RoutePoint {
  GeoPoint position;
  std::optional<double> elevation;

  friend bool operator==(const RoutePoint&, const RoutePoint&) = default;
};

/// An ordered series of at least two points from start to destination.
///
/// Consecutive duplicate positions are collapsed at construction; the first
/// occurrence (and its elevation) is kept.
class Route {
 public:
  Route(std::string id, std::vector<RoutePoint> points) : id_(std::move(id)) {
    points_.reserve(points.size());
    for (auto& p : points) {
      if (p.elevation && !std::isfinite(*p.elevation)) {
        throw ArgumentError("route point elevation is not finite");
      }
      if (!points_.empty() && points_.back().position == p.position) continue;
      points_.push_back(std::move(p));
    }
    if (points_.size() < 2) {
      throw ArgumentError("route '" + id_ + "' needs at least two distinct points");
    }
  }

  static Route from_positions(std::string id, std::span<const GeoPoint> positions) {
    std::vector<RoutePoint> pts;
    pts.reserve(positions.size());
    for (const auto& g : positions) pts.push_back({g, std::nullopt});
    return Route(std::move(id), std::move(pts));
  }

  const std::string& id() const noexcept { return id_; }
  std::span<const RoutePoint> points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  const RoutePoint& front() const noexcept { return points_.front(); }
  const RoutePoint& back() const noexcept { return points_.back(); }

  std::vector<GeoPoint> positions() const {
    std::vector<GeoPoint> out;
    out.reserve(points_.size());
    for (const auto& p : points_) out.push_back(p.position);
    return out;
  }

  bool has_all_elevations() const noexcept {
    return std::all_of(points_.begin(), points_.end(),
                       [](const RoutePoint& p) { return p.elevation.has_value(); });
  }

  friend bool operator==(const Route&, const Route&) = default;

 private:
  std::string id_;
  std::vector<RoutePoint> points_;
};

/// Great-circle distance in meters (haversine on a sphere of radius kEarthRadiusM).
inline double haversine_distance(const GeoPoint& p, const GeoPoint& q) noexcept {
  using detail::kDegToRad;
  const double phi1 = p.lat() * kDegToRad;
  const double phi2 = q.lat() * kDegToRad;
  const double dphi = (q.lat() - p.lat()) * kDegToRad;
  const double dlambda = (q.lng() - p.lng()) * kDegToRad;
  const double s1 = std::sin(dphi / 2);
  const double s2 = std::sin(dlambda / 2);
  const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

/// Sum of consecutive segment lengths, accumulated left to right.
inline double path_length(const Route& route) noexcept {
  const auto pts = route.points();
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
    total += haversine_distance(pts[j].position, pts[j + 1].position);
  }
  return total;
}

namespace detail {
struct Vec3 {
  double x, y, z;
};

inline Vec3 to_unit(const GeoPoint& p) {
  const double phi = p.lat() * kDegToRad;
  const double lambda = p.lng() * kDegToRad;
  return {std::cos(phi) * std::cos(lambda), std::cos(phi) * std::sin(lambda), std::sin(phi)};
}

inline GeoPoint from_unit(const Vec3& v) {
  const double lat = std::atan2(v.z, std::hypot(v.x, v.y)) * kRadToDeg;
  const double lng = std::atan2(v.y, v.x) * kRadToDeg;
  return GeoPoint(std::clamp(lat, -90.0, 90.0), lng);
}
}  // namespace detail

/// Point at fraction `t` in [0, 1] along the great circle from p to q (slerp).
inline GeoPoint interpolate_great_circle(const GeoPoint& p, const GeoPoint& q, double t) {
  const auto a = detail::to_unit(p);
  const auto b = detail::to_unit(q);
  const double omega = haversine_distance(p, q) / kEarthRadiusM;
  if (omega < 1e-15) return p;
  const double so = std::sin(omega);
  const double wa = std::sin((1 - t) * omega) / so;
  const double wb = std::sin(t * omega) / so;
  return detail::from_unit({wa * a.x + wb * b.x, wa * a.y + wb * b.y, wa * a.z + wb * b.z});
}

/// Inserts great-circle-interpolated points so that no segment exceeds
/// `max_interval` meters. A segment of length L is split into ceil(L / max_interval)
/// equal parts. Original points, including their elevations, are kept in order;
/// inserted points carry no elevation.
inline Route resample_route(const Route& route, double max_interval) {
  if (!(max_interval > 0.0) || !std::isfinite(max_interval)) {
    throw ArgumentError("resample interval must be positive");
  }
  const auto pts = route.points();
  std::vector<RoutePoint> out;
  out.reserve(pts.size());
  out.push_back(pts.front());
  for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
    const auto& a = pts[j].position;
    const auto& b = pts[j + 1].position;
    const double d = haversine_distance(a, b);
    const auto parts = static_cast<std::size_t>(std::ceil(d / max_interval));
    for (std::size_t s = 1; s < parts; ++s) {
      out.push_back({interpolate_great_circle(a, b, static_cast<double>(s) / static_cast<double>(parts)),
                     std::nullopt});
    }
    out.push_back(pts[j + 1]);
  }
  return Route(route.id(), std::move(out));
}

/// Rounds both coordinates to the 1e-5 degree grid used for interchange and caching.
inline GeoPoint quantize(const GeoPoint& p) {
  return GeoPoint(std::round(p.lat() * 1e5) / 1e5, std::round(p.lng() * 1e5) / 1e5);
}

}  // namespace terrarank

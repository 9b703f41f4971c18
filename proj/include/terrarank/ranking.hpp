#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <future>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "terrarank/elevation.hpp"
#include "terrarank/error.hpp"
#include "terrarank/geo.hpp"
#include "terrarank/polyline.hpp"
#include "terrarank/routing.hpp"
#include "terrarank/weighting.hpp"

namespace terrarank {

enum class Preference { shortest, comfort, challenge };

inline std::string_view to_string(Preference p) {
  switch (p) {
    case Preference::shortest: return "shortest";
    case Preference::comfort: return "comfort";
    case Preference::challenge: return "challenge";
  }
  return "?";
}

inline std::optional<Preference> parse_preference(std::string_view s) {
  if (s == "shortest") return Preference::shortest;
  if (s == "comfort") return Preference::comfort;
  if (s == "challenge") return Preference::challenge;
  return std::nullopt;
}

inline constexpr double kDefaultResampleIntervalM = 30.0;

/// (distance from start, elevation) per route point.
struct ElevationProfile {
  std::vector<double> cum_distance;
  std::vector<double> elevation;

  std::size_t size() const noexcept { return cum_distance.size(); }
  friend bool operator==(const ElevationProfile&, const ElevationProfile&) = default;
};

inline ElevationProfile elevation_profile(const Route& route) {
  const auto pts = route.points();
  ElevationProfile profile;
  profile.cum_distance.reserve(pts.size());
  profile.elevation.reserve(pts.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!pts[i].elevation) {
      throw AnnotationError("route '" + route.id() + "' point " + std::to_string(i) + " has no elevation", i);
    }
    if (i > 0) acc += haversine_distance(pts[i - 1].position, pts[i].position);
    profile.cum_distance.push_back(acc);
    profile.elevation.push_back(*pts[i].elevation);
  }
  return profile;
}

struct RankedRoute {
  Route candidate;  // as received from the route source
  Route route;      // resampled and elevation-annotated
  double od;
  double wd;
  std::size_t rank;
  ElevationProfile profile;
};

namespace detail {

inline RankedRoute score_candidate(const Route& candidate, const ElevationProvider& provider,
                                   const WeightSpec& spec, double resample_interval) {
  auto annotated = attach_elevations(resample_route(candidate, resample_interval), provider);
  const double od = path_length(annotated);
  const double wd = weighted_distance(annotated, spec);
  auto profile = elevation_profile(annotated);
  return RankedRoute{candidate, std::move(annotated), od, wd, 0, std::move(profile)};
}

}  // namespace detail

/// Resamples, annotates and scores every candidate, then orders them:
/// shortest by od ascending, comfort by wd ascending, challenge by wd
/// descending. Ties fall back to od ascending, then candidate order.
inline std::vector<RankedRoute> rank_candidates(const CandidateSet& candidates, const ElevationProvider& provider,
                                                const WeightSpec& spec, Preference pref,
                                                double resample_interval = kDefaultResampleIntervalM) {
  if (candidates.routes.empty()) throw ArgumentError("candidate set is empty");
  spec.validate();
  if (!(resample_interval > 0)) throw ArgumentError("resample interval must be positive");

  std::vector<std::future<RankedRoute>> jobs;
  jobs.reserve(candidates.routes.size());
  for (const auto& r : candidates.routes) {
    jobs.push_back(std::async(std::launch::async, [&, &route = r] {
      return detail::score_candidate(route, provider, spec, resample_interval);
    }));
  }
  std::vector<RankedRoute> scored;
  scored.reserve(jobs.size());
  for (auto& j : jobs) scored.push_back(j.get());

  std::vector<std::size_t> order(scored.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ra = scored[a];
    const auto& rb = scored[b];
    switch (pref) {
      case Preference::shortest: break;
      case Preference::comfort:
        if (ra.wd != rb.wd) return ra.wd < rb.wd;
        break;
      case Preference::challenge:
        if (ra.wd != rb.wd) return ra.wd > rb.wd;
        break;
    }
    return ra.od < rb.od;
  });

  std::vector<RankedRoute> out;
  out.reserve(scored.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    out.push_back(std::move(scored[order[rank]]));
    out.back().rank = rank;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Report

struct ReportRoute {
  std::string id;
  std::size_t points = 0;  // candidate point count, before resampling
  double od_m = 0;
  double wd_m = 0;
  std::size_t rank = 0;
  std::vector<double> profile_d;
  std::vector<double> profile_e;
  std::string polyline;

  friend bool operator==(const ReportRoute&, const ReportRoute&) = default;
};

struct Report {
  std::string preference;
  double alpha = kDefaultAlpha;
  std::vector<ReportRoute> routes;

  friend bool operator==(const Report&, const Report&) = default;
};

inline Report comparison_report(const std::vector<RankedRoute>& ranked, Preference pref, double alpha) {
  if (ranked.empty()) throw ArgumentError("cannot report an empty ranking");
  Report report{std::string(to_string(pref)), alpha, {}};
  for (const auto& r : ranked) {
    report.routes.push_back({r.candidate.id(), r.candidate.size(), r.od, r.wd, r.rank, r.profile.cum_distance,
                             r.profile.elevation, encode_polyline(r.candidate.positions())});
  }
  return report;
}

inline void to_json(nlohmann::json& j, const ReportRoute& r) {
  j = nlohmann::json{{"id", r.id},
                     {"points", r.points},
                     {"od_m", r.od_m},
                     {"wd_m", r.wd_m},
                     {"rank", r.rank},
                     {"profile", {{"d", r.profile_d}, {"e", r.profile_e}}},
                     {"polyline", r.polyline}};
}

inline void from_json(const nlohmann::json& j, ReportRoute& r) {
  j.at("id").get_to(r.id);
  j.at("points").get_to(r.points);
  j.at("od_m").get_to(r.od_m);
  j.at("wd_m").get_to(r.wd_m);
  j.at("rank").get_to(r.rank);
  j.at("profile").at("d").get_to(r.profile_d);
  j.at("profile").at("e").get_to(r.profile_e);
  j.at("polyline").get_to(r.polyline);
}

inline void to_json(nlohmann::json& j, const Report& r) {
  j = nlohmann::json{{"preference", r.preference}, {"alpha", r.alpha}, {"routes", r.routes}};
}

inline void from_json(const nlohmann::json& j, Report& r) {
  j.at("preference").get_to(r.preference);
  j.at("alpha").get_to(r.alpha);
  j.at("routes").get_to(r.routes);
}

/// Sorted keys, no insignificant whitespace, shortest round-trip numbers.
inline std::string canonical_json(const nlohmann::json& j) { return j.dump(); }

inline Report parse_report(std::string_view text) {
  try {
    return nlohmann::json::parse(text).get<Report>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("report JSON: ") + e.what(), 0);
  }
}

/// Fixed-width text table: Rank, Route, Points, od m, wd m (distances rounded to meters).
inline std::string report_table(const Report& report) {
  std::string out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-5s %-10s %7s %9s %9s\n", "Rank", "Route", "Points", "od m", "wd m");
  out += buf;
  for (const auto& r : report.routes) {
    std::snprintf(buf, sizeof buf, "%-5zu %-10s %7zu %9.0f %9.0f\n", r.rank, r.id.c_str(), r.points,
                  std::round(r.od_m), std::round(r.wd_m));
    out += buf;
  }
  return out;
}

/// "d_m,e_m" CSV of a profile, one row per point.
inline std::string profile_csv(const ElevationProfile& profile) {
  std::string out = "d_m,e_m\n";
  char buf[64];
  for (std::size_t i = 0; i < profile.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.3f,%.3f\n", profile.cum_distance[i], profile.elevation[i]);
    out += buf;
  }
  return out;
}

// ---------------------------------------------------------------------------
// GeoJSON

/// LineString feature with [lng, lat] coordinates and, when every point has
/// one, an "elevations" property parallel to the coordinates.
inline nlohmann::json route_geojson(const Route& route) {
  auto coords = nlohmann::json::array();
  for (const auto& p : route.points()) coords.push_back({p.position.lng(), p.position.lat()});
  nlohmann::json props{{"id", route.id()}};
  if (route.has_all_elevations()) {
    auto e = nlohmann::json::array();
    for (const auto& p : route.points()) e.push_back(*p.elevation);
    props["elevations"] = std::move(e);
  }
  return {{"type", "Feature"},
          {"geometry", {{"type", "LineString"}, {"coordinates", std::move(coords)}}},
          {"properties", std::move(props)}};
}

inline nlohmann::json ranked_geojson(const std::vector<RankedRoute>& ranked) {
  auto features = nlohmann::json::array();
  for (const auto& r : ranked) {
    auto f = route_geojson(r.route);
    f["properties"]["rank"] = r.rank;
    f["properties"]["od_m"] = r.od;
    f["properties"]["wd_m"] = r.wd;
    features.push_back(std::move(f));
  }
  return {{"type", "FeatureCollection"}, {"features", std::move(features)}};
}

}  // namespace terrarank

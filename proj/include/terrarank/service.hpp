#pragma once

// Wires configuration, route sources, elevation providers and ranking into an
// application object, and exposes it over HTTP:
//
//   POST /v1/rank    {"origin":{lat,lng},"destination":{lat,lng},
//                     "preference"?: "comfort"|"challenge"|"shortest",
//                     "alpha"?: number, "k"?: int}
//   GET  /v1/health  {"status":"ok","sources":{"elevation":..,"routes":..}}
//
// Errors are {"error":{"code","message"}} with 400/404/502/500.

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "terrarank/config.hpp"
#include "terrarank/elevation.hpp"
#include "terrarank/error.hpp"
#include "terrarank/geo.hpp"
#include "terrarank/ranking.hpp"
#include "terrarank/routing.hpp"
#include "terrarank/transport.hpp"
#include "terrarank/weighting.hpp"

namespace terrarank {

struct RankRequest {
  GeoPoint origin;
  GeoPoint destination;
  Preference preference = Preference::comfort;
  std::optional<double> alpha;
  std::optional<std::size_t> k;
};

struct RankResult {
  std::vector<RankedRoute> ranked;
  Report report;
};

/// Request-independent state: immutable graph/DEM/config plus the shared
/// elevation cache. Safe to use from concurrent request handlers.
class App {
 public:
  explicit App(AppConfig config) : config_(std::move(config)) {
    if (config_.cache_path) {
      cache_ = std::make_shared<ElevationCache>();
      cache_->load_file(config_.resolve(*config_.cache_path));
    }

    std::shared_ptr<const ElevationProvider> base;
    if (config_.dem_path) {
      auto grid = std::make_shared<const DemGrid>(load_dem(read_file(config_.resolve(*config_.dem_path))));
      base = std::make_shared<DemElevationProvider>(std::move(grid));
    } else if (config_.elevation_url) {
      base = std::make_shared<RemoteElevationProvider>(Endpoint(*config_.elevation_url, config_.base_dir),
                                                       config_.api_key.value_or(""));
    }
    elevation_ = cache_ ? std::make_shared<CachedElevationProvider>(base, cache_) : base;

    if (config_.directions_url) {
      directions_ = std::make_shared<HttpDirectionsClient>(Endpoint(*config_.directions_url, config_.base_dir),
                                                           config_.api_key.value_or(""));
    }
    if (config_.graph_path) {
      graph_ = std::make_shared<const RoadGraph>(load_graph(read_file(config_.resolve(*config_.graph_path))));
    }
  }

  const AppConfig& config() const noexcept { return config_; }
  const ElevationProvider& elevation() const { return *elevation_; }

  std::string elevation_source() const { return elevation_ ? elevation_->kind() : "none"; }

  std::string route_source() const {
    if (directions_) return to_string(directions_->source());
    if (graph_) return "local";
    return "none";
  }

  WeightSpec weight_spec(std::optional<double> alpha = std::nullopt) const {
    WeightSpec spec;
    spec.alpha = alpha.value_or(config_.alpha);
    spec.grade_mode = config_.grade_mode;
    return spec;
  }

  /// Directions provider if configured, otherwise the local graph.
  CandidateSet candidates(const GeoPoint& origin, const GeoPoint& destination, std::size_t k,
                          const WeightSpec& spec) const {
    if (origin == destination) throw NoRouteError("origin and destination are identical");
    if (directions_) return fetch_provider_routes(*directions_, origin, destination, k);
    if (!graph_) throw Error("no route source configured");
    const auto src = snap_to_graph(*graph_, origin);
    const auto dst = snap_to_graph(*graph_, destination);
    if (src == dst) throw NoRouteError("origin and destination snap to the same node");
    auto set = config_.weight_in_search
                   ? k_alternatives(*graph_, src, dst, k, config_.penalty, slope_edge_cost(node_elevations(), spec))
                   : k_alternatives(*graph_, src, dst, k, config_.penalty);
    set.requested_origin = origin;
    set.requested_destination = destination;
    return set;
  }

  RankResult rank(const RankRequest& req) const {
    const auto k = req.k.value_or(config_.k);
    if (k < 1) throw ArgumentError("k must be at least 1");
    const auto spec = weight_spec(req.alpha);
    spec.validate();
    const auto set = candidates(req.origin, req.destination, k, spec);
    auto ranked = rank_candidates(set, *elevation_, spec, req.preference, config_.resample_interval_m);
    auto report = comparison_report(ranked, req.preference, spec.alpha);
    return {std::move(ranked), std::move(report)};
  }

  void save_cache() const {
    if (cache_ && config_.cache_path) cache_->save_file(config_.resolve(*config_.cache_path));
  }

 private:
  std::vector<double> node_elevations() const {
    std::vector<GeoPoint> pts;
    for (const auto& n : graph_->nodes()) pts.push_back(n.position);
    std::vector<double> out;
    for (const auto& s : fetch_elevations(*elevation_, pts)) out.push_back(s.elevation);
    return out;
  }

  AppConfig config_;
  std::shared_ptr<ElevationCache> cache_;
  std::shared_ptr<const ElevationProvider> elevation_;
  std::shared_ptr<const DirectionsClient> directions_;
  std::shared_ptr<const RoadGraph> graph_;
};

// ---------------------------------------------------------------------------
// HTTP

struct HttpReply {
  int status = 200;
  std::string body;
};

namespace detail {

inline HttpReply error_reply(int status, const std::string& code, const std::string& message) {
  return {status, canonical_json({{"error", {{"code", code}, {"message", message}}}}) + "\n"};
}

struct BadRequest {
  std::string code;
  std::string message;
};

inline GeoPoint parse_point(const nlohmann::json& j, const char* name) {
  if (!j.is_object() || !j.contains("lat") || !j.contains("lng") || !j["lat"].is_number() ||
      !j["lng"].is_number()) {
    throw BadRequest{"invalid_request", std::string(name) + " must be an object with numeric lat and lng"};
  }
  const double lat = j["lat"].get<double>();
  const double lng = j["lng"].get<double>();
  if (lat < -90 || lat > 90 || lng < -180 || lng > 180) {
    throw BadRequest{"invalid_coordinates", std::string(name) + " is outside the valid lat/lng range"};
  }
  return GeoPoint(lat, lng);
}

inline RankRequest parse_rank_request(const std::string& body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error&) {
    throw BadRequest{"invalid_request", "request body is not valid JSON"};
  }
  if (!j.is_object()) throw BadRequest{"invalid_request", "request body must be a JSON object"};
  if (!j.contains("origin") || !j.contains("destination")) {
    throw BadRequest{"invalid_request", "origin and destination are required"};
  }
  RankRequest req{parse_point(j["origin"], "origin"), parse_point(j["destination"], "destination"),
                  Preference::comfort, std::nullopt, std::nullopt};
  if (j.contains("preference")) {
    const auto p = j["preference"].is_string() ? parse_preference(j["preference"].get<std::string>()) : std::nullopt;
    if (!p) throw BadRequest{"invalid_request", "preference must be comfort, challenge or shortest"};
    req.preference = *p;
  }
  if (j.contains("alpha")) {
    if (!j["alpha"].is_number() || !std::isfinite(j["alpha"].get<double>()) || j["alpha"].get<double>() < 0) {
      throw BadRequest{"invalid_request", "alpha must be a number >= 0"};
    }
    req.alpha = j["alpha"].get<double>();
  }
  if (j.contains("k")) {
    if (!j["k"].is_number_unsigned() || j["k"].get<std::size_t>() < 1) {
      throw BadRequest{"invalid_request", "k must be a positive integer"};
    }
    req.k = j["k"].get<std::size_t>();
  }
  return req;
}

}  // namespace detail

/// Body of a successful rank call; also what `rank --format json` prints.
inline std::string report_body(const Report& report) { return canonical_json(report) + "\n"; }

inline HttpReply handle_rank(const App& app, const std::string& body) {
  try {
    const auto req = detail::parse_rank_request(body);
    return {200, report_body(app.rank(req).report)};
  } catch (const detail::BadRequest& e) {
    return detail::error_reply(400, e.code, e.message);
  } catch (const NoRouteError& e) {
    return detail::error_reply(404, "no_route", e.what());
  } catch (const ProviderError& e) {
    return detail::error_reply(502, "upstream_error", e.what());
  } catch (const ArgumentError& e) {
    return detail::error_reply(400, "invalid_request", e.what());
  } catch (const std::exception& e) {
    return detail::error_reply(500, "internal", e.what());
  }
}

inline HttpReply handle_health(const App& app) {
  return {200, canonical_json({{"status", "ok"},
                               {"sources", {{"elevation", app.elevation_source()}, {"routes", app.route_source()}}}}) +
                   "\n"};
}

/// Registers the API routes on `server`. `app` must outlive the server.
inline void mount_routes(httplib::Server& server, const App& app) {
  const auto cors = app.config().cors_origin;
  const auto add_cors = [cors](httplib::Response& res) {
    if (cors) {
      res.set_header("Access-Control-Allow-Origin", *cors);
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    }
  };
  server.Post("/v1/rank", [&app, add_cors](const httplib::Request& req, httplib::Response& res) {
    const auto reply = handle_rank(app, req.body);
    res.status = reply.status;
    res.set_content(reply.body, "application/json");
    add_cors(res);
  });
  server.Get("/v1/health", [&app, add_cors](const httplib::Request&, httplib::Response& res) {
    const auto reply = handle_health(app);
    res.status = reply.status;
    res.set_content(reply.body, "application/json");
    add_cors(res);
  });
  server.Options(R"(/v1/.*)", [add_cors](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
    add_cors(res);
  });
}

}  // namespace terrarank

#pragma once

// Command-line front end:
//
//   terrarank rank    --origin LAT,LNG --dest LAT,LNG [--mode M] [--alpha N] [--k N]
//                     [--format json|table|geojson] [--config PATH]
//   terrarank profile --route-id ID --origin LAT,LNG --dest LAT,LNG [...] | --polyline STR
//   terrarank serve   [--config PATH] [--listen HOST:PORT]
//
// Exit codes: 0 ok, 1 internal, 2 usage/config, 3 no route or unknown id,
// 4 provider/elevation failure. Diagnostics go to stderr only.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "terrarank/config.hpp"
#include "terrarank/error.hpp"
#include "terrarank/geo.hpp"
#include "terrarank/polyline.hpp"
#include "terrarank/ranking.hpp"
#include "terrarank/service.hpp"

namespace terrarank {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int internal = 1;
inline constexpr int usage = 2;
inline constexpr int no_route = 3;
inline constexpr int provider = 4;
}  // namespace exit_code

namespace detail {

inline std::optional<GeoPoint> parse_lat_lng(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) return std::nullopt;
  const auto lat = parse_double(std::string_view(text).substr(0, comma));
  const auto lng = parse_double(std::string_view(text).substr(comma + 1));
  if (!lat || !lng || *lng < -180 || *lng > 180) return std::nullopt;
  try {
    return GeoPoint(*lat, *lng);
  } catch (const ArgumentError&) {
    return std::nullopt;
  }
}

inline AppConfig cli_config(const std::string& path, const EnvMap& env) {
  std::string resolved = path;
  if (resolved.empty()) {
    if (auto it = env.find("TERRARANK_CONFIG"); it != env.end()) resolved = it->second;
  }
  if (resolved.empty()) return load_config("", env);
  std::string text;
  try {
    text = read_file(resolved);
  } catch (const ProviderError&) {
    throw ConfigError({"cannot read config file " + resolved});
  }
  return load_config(text, env, std::filesystem::absolute(resolved).parent_path());
}

}  // namespace detail

/// Runs one CLI invocation. `args` excludes the program name.
inline int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err,
                   const EnvMap& env = {}) {
  CLI::App cli{"Elevation-aware route ranking", "terrarank"};
  cli.require_subcommand(1);

  std::string config_path;
  std::string origin_text;
  std::string dest_text;
  std::string mode_text = "comfort";
  std::optional<double> alpha;
  std::optional<std::size_t> k;
  std::string format = "table";
  std::string route_id;
  std::string polyline;
  std::string listen;

  auto* rank = cli.add_subcommand("rank", "Rank candidate routes between two points");
  rank->add_option("--config", config_path, "Config file (JSON)");
  rank->add_option("--origin", origin_text, "Origin as LAT,LNG")->required();
  rank->add_option("--dest", dest_text, "Destination as LAT,LNG")->required();
  rank->add_option("--mode", mode_text, "comfort | challenge | shortest")
      ->check(CLI::IsMember({"comfort", "challenge", "shortest"}));
  rank->add_option("--alpha", alpha, "Slope penalty coefficient")->check(CLI::NonNegativeNumber);
  rank->add_option("--k", k, "Number of candidate routes")->check(CLI::PositiveNumber);
  rank->add_option("--format", format, "table | json | geojson")
      ->check(CLI::IsMember({"table", "json", "geojson"}));

  auto* profile = cli.add_subcommand("profile", "Print an elevation profile as d_m,e_m CSV");
  profile->add_option("--config", config_path, "Config file (JSON)");
  auto* id_opt = profile->add_option("--route-id", route_id, "Route id from a rank run");
  auto* poly_opt = profile->add_option("--polyline", polyline, "Encoded polyline");
  id_opt->excludes(poly_opt);
  profile->add_option("--origin", origin_text, "Origin as LAT,LNG (with --route-id)");
  profile->add_option("--dest", dest_text, "Destination as LAT,LNG (with --route-id)");
  profile->add_option("--mode", mode_text, "comfort | challenge | shortest")
      ->check(CLI::IsMember({"comfort", "challenge", "shortest"}));
  profile->add_option("--alpha", alpha, "Slope penalty coefficient")->check(CLI::NonNegativeNumber);
  profile->add_option("--k", k, "Number of candidate routes")->check(CLI::PositiveNumber);

  auto* serve = cli.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--config", config_path, "Config file (JSON)");
  serve->add_option("--listen", listen, "HOST:PORT (overrides listen_addr)");

  std::vector<std::string> argv_store{"terrarank"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    cli.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << cli.help();
    return exit_code::ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << cli.help();
    return exit_code::usage;
  }

  const auto usage = [&](const std::string& msg) {
    err << "error: " << msg << "\n";
    return exit_code::usage;
  };

  try {
    const auto cfg = detail::cli_config(config_path, env);
    const auto pref = *parse_preference(mode_text);

    if (rank->parsed() || (profile->parsed() && !route_id.empty())) {
      if (origin_text.empty() || dest_text.empty()) return usage("--origin and --dest are required");
      const auto origin = detail::parse_lat_lng(origin_text);
      const auto dest = detail::parse_lat_lng(dest_text);
      if (!origin || !dest) return usage("coordinates must be LAT,LNG within range");
      const App app(cfg);
      const auto result = app.rank({*origin, *dest, pref, alpha, k});
      app.save_cache();
      if (rank->parsed()) {
        if (format == "json") out << report_body(result.report);
        else if (format == "geojson") out << canonical_json(ranked_geojson(result.ranked)) << "\n";
        else out << report_table(result.report);
        return exit_code::ok;
      }
      for (const auto& r : result.ranked) {
        if (r.candidate.id() == route_id) {
          out << profile_csv(r.profile);
          return exit_code::ok;
        }
      }
      err << "error: no route with id '" << route_id << "'\n";
      return exit_code::no_route;
    }

    if (profile->parsed()) {
      if (polyline.empty()) return usage("profile needs --route-id or --polyline");
      std::vector<GeoPoint> pts;
      try {
        pts = decode_polyline(polyline);
      } catch (const ParseError& e) {
        return usage(e.what());
      }
      if (pts.size() < 2) return usage("polyline needs at least two points");
      const App app(cfg);
      const auto route = Route::from_positions("polyline", pts);
      const auto annotated = attach_elevations(resample_route(route, cfg.resample_interval_m), app.elevation());
      app.save_cache();
      out << profile_csv(elevation_profile(annotated));
      return exit_code::ok;
    }

    // serve
    auto server_cfg = cfg;
    if (!listen.empty()) server_cfg.listen_addr = listen;
    const auto colon = server_cfg.listen_addr.rfind(':');
    const auto host = server_cfg.listen_addr.substr(0, colon);
    int port = 0;
    const auto port_text = server_cfg.listen_addr.substr(colon + 1);
    if (std::from_chars(port_text.data(), port_text.data() + port_text.size(), port).ec != std::errc()) {
      return usage("listen address must be HOST:PORT");
    }
    const App app(server_cfg);
    httplib::Server server;
    mount_routes(server, app);
    err << "listening on " << host << ":" << port << "\n";
    if (!server.listen(host, port)) {
      err << "error: cannot listen on " << server_cfg.listen_addr << "\n";
      return exit_code::internal;
    }
    app.save_cache();
    return exit_code::ok;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::usage;
  } catch (const NoRouteError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::no_route;
  } catch (const ProviderError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::provider;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::internal;
  }
}

}  // namespace terrarank

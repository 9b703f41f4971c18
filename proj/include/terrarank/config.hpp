#pragma once

#include <cctype>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "terrarank/error.hpp"
#include "terrarank/ranking.hpp"
#include "terrarank/routing.hpp"
#include "terrarank/weighting.hpp"

namespace terrarank {

using EnvMap = std::map<std::string, std::string>;

inline constexpr std::string_view kEnvPrefix = "TERRARANK_";

struct AppConfig {
  std::optional<std::string> graph_path;
  std::optional<std::string> dem_path;
  std::optional<std::string> elevation_url;
  std::optional<std::string> directions_url;
  std::optional<std::string> api_key;
  std::optional<std::string> cache_path;
  std::optional<std::string> cors_origin;
  double alpha = kDefaultAlpha;
  GradeMode grade_mode = GradeMode::absolute;
  double resample_interval_m = kDefaultResampleIntervalM;
  std::size_t k = kDefaultCandidates;
  double penalty = kDefaultPenalty;
  bool weight_in_search = false;
  std::string listen_addr = "127.0.0.1:8080";

  /// Directory relative paths and file:// URLs are resolved against. Not serialized.
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& p) const {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  }

  bool operator==(const AppConfig& o) const {
    return graph_path == o.graph_path && dem_path == o.dem_path && elevation_url == o.elevation_url &&
           directions_url == o.directions_url && api_key == o.api_key && cache_path == o.cache_path &&
           cors_origin == o.cors_origin && alpha == o.alpha && grade_mode == o.grade_mode &&
           resample_interval_m == o.resample_interval_m && k == o.k && penalty == o.penalty &&
           weight_in_search == o.weight_in_search && listen_addr == o.listen_addr;
  }
};

namespace detail {

enum class KeyType { string, number, count, boolean, grade_mode };

struct ConfigKey {
  std::string_view name;
  KeyType type;
};

inline constexpr ConfigKey kConfigKeys[] = {
    {"graph_path", KeyType::string},     {"dem_path", KeyType::string},
    {"elevation_url", KeyType::string},  {"directions_url", KeyType::string},
    {"api_key", KeyType::string},        {"cache_path", KeyType::string},
    {"cors_origin", KeyType::string},    {"alpha", KeyType::number},
    {"grade_mode", KeyType::grade_mode}, {"resample_interval_m", KeyType::number},
    {"k", KeyType::count},               {"penalty", KeyType::number},
    {"weight_in_search", KeyType::boolean}, {"listen_addr", KeyType::string},
};

inline std::string env_name(std::string_view key) {
  std::string out(kEnvPrefix);
  for (char c : key) out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return out;
}

// Converts an environment string into the JSON value the file would hold.
inline std::optional<nlohmann::json> env_value(KeyType type, const std::string& raw) {
  switch (type) {
    case KeyType::string:
    case KeyType::grade_mode: return nlohmann::json(raw);
    case KeyType::boolean:
      if (raw == "true" || raw == "1") return nlohmann::json(true);
      if (raw == "false" || raw == "0") return nlohmann::json(false);
      return std::nullopt;
    case KeyType::number:
    case KeyType::count: {
      const auto v = parse_double(raw);
      if (!v) return std::nullopt;
      if (type == KeyType::count) {
        if (*v < 0 || *v != std::floor(*v)) return std::nullopt;
        return nlohmann::json(static_cast<std::uint64_t>(*v));
      }
      return nlohmann::json(*v);
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Parses a JSON config document, applies TERRARANK_* overrides from `env`,
/// fills defaults and validates. Every problem found is reported in one
/// ConfigError. Values are never echoed in messages.
inline AppConfig load_config(std::string_view file_content, const EnvMap& env = {},
                             const std::filesystem::path& base_dir = {}) {
  std::vector<std::string> problems;
  nlohmann::json doc = nlohmann::json::object();
  {
    std::string_view trimmed = file_content;
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.front()))) trimmed.remove_prefix(1);
    if (!trimmed.empty()) {
      try {
        doc = nlohmann::json::parse(file_content);
      } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError({"config is not valid JSON (byte " + std::to_string(e.byte) + ")"});
      }
      if (!doc.is_object()) throw ConfigError({"config must be a JSON object"});
    }
  }

  const auto known = [](std::string_view name) -> const detail::ConfigKey* {
    for (const auto& k : detail::kConfigKeys) {
      if (k.name == name) return &k;
    }
    return nullptr;
  };
  for (const auto& [key, value] : doc.items()) {
    if (!known(key)) problems.push_back("unknown key '" + key + "'");
  }
  for (const auto& [name, raw] : env) {
    if (name.rfind(kEnvPrefix, 0) != 0) continue;
    bool matched = false;
    for (const auto& k : detail::kConfigKeys) {
      if (detail::env_name(k.name) != name) continue;
      matched = true;
      if (auto v = detail::env_value(k.type, raw)) {
        doc[std::string(k.name)] = *v;
      } else {
        problems.push_back("environment variable " + name + " has the wrong type");
      }
    }
    if (!matched && name != "TERRARANK_CONFIG") problems.push_back("unknown environment variable " + name);
  }

  AppConfig cfg;
  cfg.base_dir = base_dir;
  const auto type_error = [&](const std::string& key, const char* expected) {
    problems.push_back("key '" + key + "' must be " + expected);
  };
  for (const auto& spec : detail::kConfigKeys) {
    const std::string key(spec.name);
    if (!doc.contains(key) || doc[key].is_null()) continue;
    const auto& v = doc[key];
    switch (spec.type) {
      case detail::KeyType::string: {
        if (!v.is_string()) {
          type_error(key, "a string");
          break;
        }
        auto s = v.get<std::string>();
        if (key == "graph_path") cfg.graph_path = s;
        else if (key == "dem_path") cfg.dem_path = s;
        else if (key == "elevation_url") cfg.elevation_url = s;
        else if (key == "directions_url") cfg.directions_url = s;
        else if (key == "api_key") cfg.api_key = s;
        else if (key == "cache_path") cfg.cache_path = s;
        else if (key == "cors_origin") cfg.cors_origin = s;
        else if (key == "listen_addr") cfg.listen_addr = s;
        break;
      }
      case detail::KeyType::number: {
        if (!v.is_number()) {
          type_error(key, "a number");
          break;
        }
        const double d = v.get<double>();
        if (key == "alpha") cfg.alpha = d;
        else if (key == "resample_interval_m") cfg.resample_interval_m = d;
        else if (key == "penalty") cfg.penalty = d;
        break;
      }
      case detail::KeyType::count:
        if (!v.is_number_unsigned()) {
          type_error(key, "a non-negative integer");
          break;
        }
        cfg.k = v.get<std::size_t>();
        break;
      case detail::KeyType::boolean:
        if (!v.is_boolean()) {
          type_error(key, "a boolean");
          break;
        }
        cfg.weight_in_search = v.get<bool>();
        break;
      case detail::KeyType::grade_mode: {
        const auto mode = v.is_string() ? parse_grade_mode(v.get<std::string>()) : std::nullopt;
        if (!mode) {
          type_error(key, "\"absolute\" or \"uphill_only\"");
          break;
        }
        cfg.grade_mode = *mode;
        break;
      }
    }
  }

  if (!std::isfinite(cfg.alpha) || cfg.alpha < 0) problems.push_back("alpha must be finite and >= 0");
  if (!(cfg.resample_interval_m > 0) || !std::isfinite(cfg.resample_interval_m)) {
    problems.push_back("resample_interval_m must be positive");
  }
  if (cfg.k < 1) problems.push_back("k must be at least 1");
  if (!(cfg.penalty > 1) || !std::isfinite(cfg.penalty)) problems.push_back("penalty must be > 1");
  if (!cfg.dem_path && !cfg.elevation_url) {
    problems.push_back("no elevation source: set dem_path or elevation_url");
  }
  if (!cfg.graph_path && !cfg.directions_url) {
    problems.push_back("no route source: set graph_path or directions_url");
  }
  if (cfg.listen_addr.rfind(':') == std::string::npos) problems.push_back("listen_addr must be host:port");

  if (!problems.empty()) throw ConfigError(std::move(problems));
  return cfg;
}

inline nlohmann::json config_to_json(const AppConfig& cfg) {
  nlohmann::json j{{"alpha", cfg.alpha},
                   {"grade_mode", to_string(cfg.grade_mode)},
                   {"resample_interval_m", cfg.resample_interval_m},
                   {"k", cfg.k},
                   {"penalty", cfg.penalty},
                   {"weight_in_search", cfg.weight_in_search},
                   {"listen_addr", cfg.listen_addr}};
  const auto opt = [&](const char* key, const std::optional<std::string>& v) {
    if (v) j[key] = *v;
  };
  opt("graph_path", cfg.graph_path);
  opt("dem_path", cfg.dem_path);
  opt("elevation_url", cfg.elevation_url);
  opt("directions_url", cfg.directions_url);
  opt("api_key", cfg.api_key);
  opt("cache_path", cfg.cache_path);
  opt("cors_origin", cfg.cors_origin);
  return j;
}

}  // namespace terrarank

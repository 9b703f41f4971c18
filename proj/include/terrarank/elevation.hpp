#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "terrarank/error.hpp"
#include "terrarank/geo.hpp"
#include "terrarank/transport.hpp"

namespace terrarank {

// ---------------------------------------------------------------------------
// DEM raster

/// ESRI ASCII grid. Values are registered at cell centers: the lower-left
/// cell's center is (yllcorner + cellsize/2, xllcorner + cellsize/2). Row 0 is
/// the northernmost row.
struct DemGrid {
  std::size_t ncols = 0;
  std::size_t nrows = 0;
  double xllcorner = 0.0;
  double yllcorner = 0.0;
  double cellsize = 0.0;
  double nodata_value = -9999.0;
  std::vector<double> values;

  double at(std::size_t row, std::size_t col) const { return values[row * ncols + col]; }
  bool is_nodata(double v) const noexcept { return v == nodata_value; }

  friend bool operator==(const DemGrid&, const DemGrid&) = default;
};

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view tok) {
  double v = 0.0;
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) return std::nullopt;
  return v;
}

}  // namespace detail

/// Parses an ESRI ASCII grid. Throws ParseError whose location() is the
/// 1-based line number of the offending line.
inline DemGrid load_dem(std::string_view text) {
  static constexpr std::string_view kKeys[] = {"ncols",    "nrows",    "xllcorner",
                                               "yllcorner", "cellsize", "nodata_value"};
  std::vector<std::pair<std::size_t, std::string_view>> lines;
  {
    std::size_t lineno = 1;
    std::size_t start = 0;
    while (start <= text.size()) {
      auto end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      auto line = text.substr(start, end - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (!detail::split_ws(line).empty()) lines.emplace_back(lineno, line);
      ++lineno;
      start = end + 1;
    }
  }

  std::map<std::string, double> header;
  std::size_t i = 0;
  for (; i < lines.size() && header.size() < std::size(kKeys); ++i) {
    const auto [lineno, line] = lines[i];
    const auto toks = detail::split_ws(line);
    const auto key = detail::lower(toks[0]);
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
      throw ParseError("line " + std::to_string(lineno) + ": expected header key, got '" +
                           std::string(toks[0]) + "'",
                       lineno);
    }
    if (header.contains(key)) {
      throw ParseError("line " + std::to_string(lineno) + ": duplicate header key '" + key + "'",
                       lineno);
    }
    const auto v = toks.size() == 2 ? detail::parse_double(toks[1]) : std::nullopt;
    if (!v || !std::isfinite(*v)) {
      throw ParseError("line " + std::to_string(lineno) + ": header '" + key + "' needs one number",
                       lineno);
    }
    header.emplace(key, *v);
  }
  if (header.size() < std::size(kKeys)) {
    for (auto k : kKeys) {
      if (!header.contains(std::string(k))) {
        const std::size_t at = lines.empty() ? 1 : lines.back().first + 1;
        throw ParseError("line " + std::to_string(at) + ": missing header key '" + std::string(k) + "'",
                         at);
      }
    }
  }

  DemGrid grid;
  const auto header_line = lines[i - 1].first;
  const auto as_count = [&](const char* key) -> std::size_t {
    const double v = header.at(key);
    if (v < 1 || v != std::floor(v)) {
      throw ParseError(std::string(key) + " must be a positive integer", header_line);
    }
    return static_cast<std::size_t>(v);
  };
  grid.ncols = as_count("ncols");
  grid.nrows = as_count("nrows");
  grid.xllcorner = header.at("xllcorner");
  grid.yllcorner = header.at("yllcorner");
  grid.cellsize = header.at("cellsize");
  grid.nodata_value = header.at("nodata_value");
  if (!(grid.cellsize > 0)) throw ParseError("cellsize must be positive", header_line);

  grid.values.reserve(grid.ncols * grid.nrows);
  std::size_t row = 0;
  for (; i < lines.size(); ++i, ++row) {
    const auto [lineno, line] = lines[i];
    if (row >= grid.nrows) {
      throw ParseError("line " + std::to_string(lineno) + ": more rows than nrows=" +
                           std::to_string(grid.nrows),
                       lineno);
    }
    const auto toks = detail::split_ws(line);
    if (toks.size() != grid.ncols) {
      throw ParseError("line " + std::to_string(lineno) + ": expected " +
                           std::to_string(grid.ncols) + " values, got " + std::to_string(toks.size()),
                       lineno);
    }
    for (auto tok : toks) {
      const auto v = detail::parse_double(tok);
      if (!v || !std::isfinite(*v)) {
        throw ParseError("line " + std::to_string(lineno) + ": non-numeric cell '" +
                             std::string(tok) + "'",
                         lineno);
      }
      grid.values.push_back(*v);
    }
  }
  if (row != grid.nrows) {
    const std::size_t at = lines.empty() ? 1 : lines.back().first + 1;
    throw ParseError("line " + std::to_string(at) + ": expected " + std::to_string(grid.nrows) +
                         " rows, got " + std::to_string(row),
                     at);
  }
  return grid;
}

/// Bilinear interpolation between the surrounding cell centers.
///
/// Throws RangeError outside the rectangle spanned by the outermost centers and
/// NodataError when a contributing neighbor is nodata.
inline double dem_elevation(const DemGrid& grid, const GeoPoint& p) {
  constexpr double kEps = 1e-9;
  const double fx = (p.lng() - grid.xllcorner) / grid.cellsize - 0.5;
  const double fy_south = (p.lat() - grid.yllcorner) / grid.cellsize - 0.5;
  const double max_x = static_cast<double>(grid.ncols - 1);
  const double max_y = static_cast<double>(grid.nrows - 1);
  if (fx < -kEps || fx > max_x + kEps || fy_south < -kEps || fy_south > max_y + kEps) {
    std::ostringstream msg;
    msg << "point (" << p.lat() << "," << p.lng() << ") is outside the DEM";
    throw RangeError(msg.str());
  }
  const double x = std::clamp(fx, 0.0, max_x);
  const double y = std::clamp(max_y - fy_south, 0.0, max_y);  // row coordinate from north

  const auto c0 = std::min(static_cast<std::size_t>(std::floor(x)), grid.ncols > 1 ? grid.ncols - 2 : 0);
  const auto r0 = std::min(static_cast<std::size_t>(std::floor(y)), grid.nrows > 1 ? grid.nrows - 2 : 0);
  const auto c1 = std::min(c0 + 1, grid.ncols - 1);
  const auto r1 = std::min(r0 + 1, grid.nrows - 1);
  const double tx = x - static_cast<double>(c0);
  const double ty = y - static_cast<double>(r0);

  const std::size_t rows[4] = {r0, r0, r1, r1};
  const std::size_t cols[4] = {c0, c1, c0, c1};
  const double weights[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
  double acc = 0.0;
  for (int k = 0; k < 4; ++k) {
    if (weights[k] == 0.0) continue;
    const double v = grid.at(rows[k], cols[k]);
    if (grid.is_nodata(v)) {
      throw NodataError("nodata cell at row " + std::to_string(rows[k]) + ", col " +
                            std::to_string(cols[k]),
                        rows[k], cols[k]);
    }
    acc += weights[k] * v;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Providers

enum class ElevationSource { dem, remote, cache };

inline const char* to_string(ElevationSource s) {
  switch (s) {
    case ElevationSource::dem: return "dem";
    case ElevationSource::remote: return "remote";
    case ElevationSource::cache: return "cache";
  }
  return "?";
}

struct ElevationSample {
  GeoPoint point;
  double elevation;
  ElevationSource source;
};

/// Supplies one elevation per input point, in order, or throws ProviderError.
class ElevationProvider {
 public:
  virtual ~ElevationProvider() = default;
  virtual std::vector<ElevationSample> sample(std::span<const GeoPoint> points) const = 0;
  /// Short label reported by the health endpoint ("dem", "remote").
  virtual std::string kind() const = 0;
};

class DemElevationProvider final : public ElevationProvider {
 public:
  explicit DemElevationProvider(std::shared_ptr<const DemGrid> grid) : grid_(std::move(grid)) {}

  std::vector<ElevationSample> sample(std::span<const GeoPoint> points) const override {
    std::vector<ElevationSample> out;
    out.reserve(points.size());
    std::vector<std::size_t> failed;
    std::string first_error;
    for (std::size_t i = 0; i < points.size(); ++i) {
      try {
        out.push_back({points[i], dem_elevation(*grid_, points[i]), ElevationSource::dem});
      } catch (const Error& e) {
        if (failed.empty()) first_error = e.what();
        failed.push_back(i);
      }
    }
    if (!failed.empty()) {
      throw ProviderError("DEM lookup failed for " + std::to_string(failed.size()) +
                              " point(s): " + first_error,
                          std::move(failed));
    }
    return out;
  }

  std::string kind() const override { return "dem"; }

 private:
  std::shared_ptr<const DemGrid> grid_;
};

/// Client for an elevation web service answering
/// `GET <url>?locations=lat,lng|lat,lng...[&key=...]` with
/// {"results":[{"location":{"lat","lng"},"elevation"}...],"status":"OK"}.
class RemoteElevationProvider final : public ElevationProvider {
 public:
  static constexpr std::size_t kBatchSize = 256;

  RemoteElevationProvider(Endpoint endpoint, std::string api_key = {}, RetryPolicy retry = {})
      : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)), retry_(retry) {}

  std::vector<ElevationSample> sample(std::span<const GeoPoint> points) const override {
    std::vector<ElevationSample> out;
    out.reserve(points.size());
    for (std::size_t begin = 0; begin < points.size(); begin += kBatchSize) {
      const auto batch = points.subspan(begin, std::min(kBatchSize, points.size() - begin));
      try {
        auto got = fetch_batch(batch);
        out.insert(out.end(), got.begin(), got.end());
      } catch (const ProviderError& e) {
        std::vector<std::size_t> unresolved;
        for (std::size_t i = out.size(); i < points.size(); ++i) unresolved.push_back(i);
        throw ProviderError(e.what(), std::move(unresolved));
      }
    }
    return out;
  }

  std::string kind() const override { return "remote"; }

 private:
  std::vector<ElevationSample> fetch_batch(std::span<const GeoPoint> batch) const {
    std::string query = "locations=";
    char buf[64];
    for (std::size_t i = 0; i < batch.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s%.6f,%.6f", i ? "%7C" : "", batch[i].lat(), batch[i].lng());
      query += buf;
    }
    if (!api_key_.empty()) query += "&key=" + api_key_;
    const auto body = endpoint_.get(query, retry_);

    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception&) {
      throw ProviderError("elevation service returned malformed JSON");
    }
    const auto status = doc.value("status", std::string{});
    if (status != "OK") throw ProviderError("elevation service status: " + (status.empty() ? "<missing>" : status));
    const auto results = doc.find("results");
    if (results == doc.end() || !results->is_array()) {
      throw ProviderError("elevation service response has no results array");
    }
    std::vector<ElevationSample> out;
    out.reserve(batch.size());
    for (std::size_t i = 0; i < results->size() && i < batch.size(); ++i) {
      const auto& r = (*results)[i];
      const auto e = r.find("elevation");
      if (e == r.end() || !e->is_number() || !std::isfinite(e->get<double>())) {
        throw ProviderError("elevation service result " + std::to_string(i) + " has no usable elevation");
      }
      out.push_back({batch[i], e->get<double>(), ElevationSource::remote});
    }
    if (results->size() != batch.size()) {
      throw ProviderError("elevation service returned " + std::to_string(results->size()) +
                          " results for " + std::to_string(batch.size()) + " locations");
    }
    return out;
  }

  Endpoint endpoint_;
  std::string api_key_;
  RetryPolicy retry_;
};

// ---------------------------------------------------------------------------
// Cache

/// Elevation cache keyed by coordinates quantized to 1e-5 degrees.
/// Safe for concurrent readers and writers; last write wins.
class ElevationCache {
 public:
  using Key = std::pair<std::int64_t, std::int64_t>;

  static Key key_for(const GeoPoint& p) {
    return {std::llround(p.lat() * 1e5), std::llround(p.lng() * 1e5)};
  }

  std::optional<double> lookup(const GeoPoint& p) const {
    std::shared_lock lock(mutex_);
    const auto it = entries_.find(key_for(p));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void store(const GeoPoint& p, double elevation) {
    std::unique_lock lock(mutex_);
    entries_[key_for(p)] = elevation;
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
  }

  /// Records are "lat,lng,elevation" lines with lat/lng at 1e-5 precision.
  void load(std::string_view text) {
    std::size_t lineno = 0;
    std::size_t start = 0;
    while (start < text.size()) {
      auto end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      auto line = text.substr(start, end - start);
      start = end + 1;
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.empty()) continue;
      const auto c1 = line.find(',');
      const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
      if (c2 == std::string_view::npos) {
        throw ParseError("cache line " + std::to_string(lineno) + ": expected lat,lng,elevation", lineno);
      }
      const auto lat = detail::parse_double(line.substr(0, c1));
      const auto lng = detail::parse_double(line.substr(c1 + 1, c2 - c1 - 1));
      const auto ele = detail::parse_double(line.substr(c2 + 1));
      if (!lat || !lng || !ele || !std::isfinite(*ele)) {
        throw ParseError("cache line " + std::to_string(lineno) + ": non-numeric field", lineno);
      }
      store(GeoPoint(*lat, *lng), *ele);
    }
  }

  std::string serialize() const {
    std::shared_lock lock(mutex_);
    std::string out;
    char buf[96];
    for (const auto& [key, ele] : entries_) {
      std::snprintf(buf, sizeof buf, "%.5f,%.5f,", static_cast<double>(key.first) / 1e5,
                    static_cast<double>(key.second) / 1e5);
      out += buf;
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, ele);
      out.append(buf, ptr);
      out += '\n';
    }
    return out;
  }

  void load_file(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) return;
    load(read_file(path));
  }

  void save_file(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write cache file: " + path.string());
    out << serialize();
  }

 private:
  mutable std::shared_mutex mutex_;
  std::map<Key, double> entries_;
};

/// Consults the cache first, forwards misses to `inner` in one batch and
/// writes the results back.
class CachedElevationProvider final : public ElevationProvider {
 public:
  CachedElevationProvider(std::shared_ptr<const ElevationProvider> inner,
                          std::shared_ptr<ElevationCache> cache)
      : inner_(std::move(inner)), cache_(std::move(cache)) {}

  std::vector<ElevationSample> sample(std::span<const GeoPoint> points) const override {
    std::vector<std::optional<ElevationSample>> slots(points.size());
    std::vector<GeoPoint> misses;
    std::vector<std::size_t> miss_index;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (auto hit = cache_->lookup(points[i])) {
        slots[i] = ElevationSample{points[i], *hit, ElevationSource::cache};
      } else {
        misses.push_back(points[i]);
        miss_index.push_back(i);
      }
    }
    if (!misses.empty()) {
      std::vector<ElevationSample> fetched;
      try {
        fetched = inner_->sample(misses);
      } catch (const ProviderError& e) {
        std::vector<std::size_t> unresolved;
        for (auto j : e.unresolved()) unresolved.push_back(miss_index.at(j));
        if (e.unresolved().empty()) unresolved = miss_index;
        throw ProviderError(e.what(), std::move(unresolved));
      }
      for (std::size_t j = 0; j < fetched.size(); ++j) {
        cache_->store(misses[j], fetched[j].elevation);
        slots[miss_index[j]] = ElevationSample{points[miss_index[j]], fetched[j].elevation, fetched[j].source};
      }
    }
    std::vector<ElevationSample> out;
    out.reserve(points.size());
    for (auto& s : slots) out.push_back(*s);
    return out;
  }

  std::string kind() const override { return inner_->kind(); }

 private:
  std::shared_ptr<const ElevationProvider> inner_;
  std::shared_ptr<ElevationCache> cache_;
};

// ---------------------------------------------------------------------------

/// One sample per point, in order. Partial results are never returned.
inline std::vector<ElevationSample> fetch_elevations(const ElevationProvider& provider,
                                                     std::span<const GeoPoint> points) {
  if (points.empty()) throw ArgumentError("fetch_elevations needs at least one point");
  auto samples = provider.sample(points);
  if (samples.size() != points.size()) {
    std::vector<std::size_t> unresolved;
    for (std::size_t i = samples.size(); i < points.size(); ++i) unresolved.push_back(i);
    throw ProviderError("provider returned " + std::to_string(samples.size()) + " samples for " +
                            std::to_string(points.size()) + " points",
                        std::move(unresolved));
  }
  return samples;
}

/// Returns a copy of `route` with every elevation set from `provider`.
inline Route attach_elevations(const Route& route, const ElevationProvider& provider) {
  const auto positions = route.positions();
  const auto samples = fetch_elevations(provider, positions);
  std::vector<RoutePoint> pts;
  pts.reserve(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    pts.push_back({positions[i], samples[i].elevation});
  }
  return Route(route.id(), std::move(pts));
}

}  // namespace terrarank

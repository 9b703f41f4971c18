#pragma once

// Encoded-polyline codec: coordinates at 1e-5 degree precision, each value
// delta-coded against the previous point, zigzag-mapped, split into 5-bit
// chunks (low chunk first) with 0x20 as the continuation bit, offset by 63.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "terrarank/error.hpp"
#include "terrarank/geo.hpp"

namespace terrarank {

namespace detail {

inline void encode_signed(std::int64_t value, std::string& out) {
  std::uint64_t v = value < 0 ? ~(static_cast<std::uint64_t>(value) << 1)
                              : (static_cast<std::uint64_t>(value) << 1);
  while (v >= 0x20) {
    out.push_back(static_cast<char>((0x20 | (v & 0x1F)) + 63));
    v >>= 5;
  }
  out.push_back(static_cast<char>(v + 63));
}

// Reads one value starting at `pos`; advances `pos` past it.
inline std::int64_t decode_signed(std::string_view text, std::size_t& pos) {
  const std::size_t start = pos;
  std::uint64_t result = 0;
  int shift = 0;
  while (true) {
    if (pos >= text.size()) {
      throw ParseError("truncated polyline chunk sequence at byte offset " + std::to_string(start),
                       start);
    }
    const int c = static_cast<unsigned char>(text[pos]) - 63;
    if (c < 0 || c > 0x3F) {
      throw ParseError("invalid polyline character at byte offset " + std::to_string(pos), pos);
    }
    // Coordinates are bounded well below 2^32 after scaling; anything longer is garbage.
    if (shift > 30) {
      throw ParseError("polyline value overflow at byte offset " + std::to_string(start), start);
    }
    result |= static_cast<std::uint64_t>(c & 0x1F) << shift;
    shift += 5;
    ++pos;
    if ((c & 0x20) == 0) break;
  }
  return (result & 1) ? ~static_cast<std::int64_t>(result >> 1)
                      : static_cast<std::int64_t>(result >> 1);
}

}  // namespace detail

inline std::string encode_polyline(std::span<const GeoPoint> points) {
  std::string out;
  std::int64_t prev_lat = 0;
  std::int64_t prev_lng = 0;
  for (const auto& p : points) {
    const auto lat = static_cast<std::int64_t>(std::llround(p.lat() * 1e5));
    const auto lng = static_cast<std::int64_t>(std::llround(p.lng() * 1e5));
    detail::encode_signed(lat - prev_lat, out);
    detail::encode_signed(lng - prev_lng, out);
    prev_lat = lat;
    prev_lng = lng;
  }
  return out;
}

/// Throws ParseError (location = byte offset) on truncated, overflowing or
/// out-of-alphabet input, and when a decoded coordinate is out of range.
inline std::vector<GeoPoint> decode_polyline(std::string_view encoded) {
  std::vector<GeoPoint> out;
  std::size_t pos = 0;
  std::int64_t lat = 0;
  std::int64_t lng = 0;
  while (pos < encoded.size()) {
    const std::size_t start = pos;
    lat += detail::decode_signed(encoded, pos);
    lng += detail::decode_signed(encoded, pos);
    const double lat_deg = static_cast<double>(lat) / 1e5;
    const double lng_deg = static_cast<double>(lng) / 1e5;
    if (lat_deg < -90.0 || lat_deg > 90.0) {
      throw ParseError("polyline latitude out of range at byte offset " + std::to_string(start),
                       start);
    }
    out.emplace_back(lat_deg, lng_deg);
  }
  return out;
}

}  // namespace terrarank

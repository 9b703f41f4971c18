#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace terrarank {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad interval, length mismatch, unknown id).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Text input could not be parsed. `location()` is a 1-based line number or a
/// 0-based byte offset depending on the format; the message says which.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t location)
      : Error(what), location_(location) {}
  std::size_t location() const noexcept { return location_; }

 private:
  std::size_t location_;
};

/// A query fell outside the domain of a raster.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Bilinear interpolation touched a nodata cell.
class NodataError : public Error {
 public:
  NodataError(const std::string& what, std::size_t row, std::size_t col)
      : Error(what), row_(row), col_(col) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

/// An upstream provider (elevation service, directions service, mock file) failed.
/// `unresolved()` lists the input indices that did not receive a value.
class ProviderError : public Error {
 public:
  explicit ProviderError(const std::string& what, std::vector<std::size_t> unresolved = {})
      : Error(what), unresolved_(std::move(unresolved)) {}
  const std::vector<std::size_t>& unresolved() const noexcept { return unresolved_; }

 private:
  std::vector<std::size_t> unresolved_;
};

/// A route point lacks the annotation (elevation) an operation needs.
class AnnotationError : public Error {
 public:
  AnnotationError(const std::string& what, std::size_t point_index)
      : Error(what), point_index_(point_index) {}
  std::size_t point_index() const noexcept { return point_index_; }

 private:
  std::size_t point_index_;
};

/// No route connects the requested endpoints.
class NoRouteError : public Error {
 public:
  using Error::Error;
};

/// Configuration failed validation; `problems()` lists every issue found.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> problems)
      : Error(join(problems)), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& problems) {
    std::string out = "invalid configuration";
    for (const auto& p : problems) {
      out += "; ";
      out += p;
    }
    return out;
  }
  std::vector<std::string> problems_;
};

}  // namespace terrarank

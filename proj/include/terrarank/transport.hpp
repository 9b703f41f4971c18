#pragma once

// Minimal GET transport shared by the remote elevation and directions clients.
// Supports http(s):// through cpp-httplib and file:// for offline mocks.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>

#include <httplib.h>

#include "terrarank/error.hpp"

namespace terrarank {

struct RetryPolicy {
  int transport_retries = 1;
  std::chrono::milliseconds delay{200};
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ProviderError("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// A parsed endpoint URL. Query strings are appended per request; the
/// API key is only ever placed in the request path, never in messages.
class Endpoint {
 public:
  Endpoint() = default;

  /// `base_dir` resolves relative file:// paths.
  explicit Endpoint(const std::string& url, const std::filesystem::path& base_dir = {})
      : url_(url) {
    if (url.rfind("file://", 0) == 0) {
      file_ = true;
      std::filesystem::path p = url.substr(7);
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      path_ = p.string();
      return;
    }
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ArgumentError("endpoint URL has no scheme: " + url);
    const auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
      throw ArgumentError("unsupported endpoint scheme: " + scheme);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    host_ = url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
  }

  bool is_file() const noexcept { return file_; }
  const std::string& url() const noexcept { return url_; }

  /// Performs a GET of `path + query`; file endpoints ignore the query.
  std::string get(const std::string& query, const RetryPolicy& retry = {}) const {
    if (file_) return read_file(path_);
    const std::string target = path_ + (query.empty() ? "" : (path_.find('?') == std::string::npos ? "?" : "&") + query);
    for (int attempt = 0;; ++attempt) {
      httplib::Client client(host_);
      client.set_connection_timeout(std::chrono::seconds(5));
      client.set_read_timeout(std::chrono::seconds(15));
      auto res = client.Get(target);
      if (res) {
        if (res->status != 200) {
          throw ProviderError(url_ + " returned HTTP " + std::to_string(res->status));
        }
        return res->body;
      }
      if (attempt >= retry.transport_retries) {
        throw ProviderError(url_ + " transport failure: " + httplib::to_string(res.error()));
      }
      std::this_thread::sleep_for(retry.delay);
    }
  }

 private:
  std::string url_;
  bool file_ = false;
  std::string host_;
  std::string path_;
};

}  // namespace terrarank

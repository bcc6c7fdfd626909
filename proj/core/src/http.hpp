#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace osslc::detail {

struct HttpResponse {
  int status = 0;
  std::string body;
  std::multimap<std::string, std::string> headers;  // lower-cased names

  std::optional<std::string> header(const std::string& name) const;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

// GET base_url + target. base_url is scheme://host[:port]; target starts
// with '/'. Throws NetworkError on transport failure.
HttpResponse http_get(const std::string& base_url, const std::string& target,
                      const HttpHeaders& headers, std::chrono::seconds timeout);

// Splits an absolute URL into (scheme://host[:port], /path?query).
std::pair<std::string, std::string> split_url(const std::string& url);

}  // namespace osslc::detail

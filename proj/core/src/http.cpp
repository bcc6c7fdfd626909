#include "http.hpp"

#include <algorithm>
#include <cctype>

#include "httplib.h"
#include "osslc/error.hpp"

namespace osslc::detail {
namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

std::optional<std::string> HttpResponse::header(const std::string& name) const {
  auto it = headers.find(lower(name));
  if (it == headers.end()) return std::nullopt;
  return it->second;
}

HttpResponse http_get(const std::string& base_url, const std::string& target,
                      const HttpHeaders& headers, std::chrono::seconds timeout) {
  httplib::Client client(base_url);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_follow_location(true);

  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);

  auto result = client.Get(target, h);
  if (!result) {
    throw NetworkError("GET " + base_url + target + " failed: " +
                       httplib::to_string(result.error()));
  }
  HttpResponse out;
  out.status = result->status;
  out.body = std::move(result->body);
  for (const auto& [k, v] : result->headers) out.headers.emplace(lower(k), v);
  return out;
}

std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme = url.find("://");
  const auto start = scheme == std::string::npos ? 0 : scheme + 3;
  const auto slash = url.find('/', start);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

}  // namespace osslc::detail

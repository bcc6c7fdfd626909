#include "osslc/github.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <mutex>
#include <thread>

#include "http.hpp"
#include "json.hpp"
#include "osslc/error.hpp"

namespace osslc {
namespace {

using json = nlohmann::json;
using detail::HttpResponse;

bool valid_component(const std::string& s) {
  return !s.empty() && s != "." && s != ".." &&
         std::all_of(s.begin(), s.end(), [](unsigned char c) {
           return std::isalnum(c) || c == '-' || c == '_' || c == '.';
         });
}

// "<url1>; rel="next", <url2>; rel="last"" -> url1
std::optional<std::string> next_link(const std::optional<std::string>& link) {
  if (!link) return std::nullopt;
  std::size_t pos = 0;
  while (pos < link->size()) {
    const auto open = link->find('<', pos);
    if (open == std::string::npos) break;
    const auto close = link->find('>', open);
    if (close == std::string::npos) break;
    const auto end = link->find(',', close);
    const auto params = link->substr(close + 1, end == std::string::npos ? std::string::npos
                                                                          : end - close - 1);
    if (params.find("rel=\"next\"") != std::string::npos) {
      return link->substr(open + 1, close - open - 1);
    }
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return std::nullopt;
}

long long header_int(const HttpResponse& r, const std::string& name, long long fallback) {
  auto v = r.header(name);
  if (!v) return fallback;
  try {
    return std::stoll(*v);
  } catch (...) {
    return fallback;
  }
}

class GitHubSession {
 public:
  GitHubSession(const RepoId& repo, const FetchOptions& options)
      : repo_(repo), options_(options) {
    headers_ = {{"Accept", "application/vnd.github+json"},
                {"User-Agent", "osslc"},
                {"X-GitHub-Api-Version", "2022-11-28"}};
    if (options_.token && !options_.token->empty()) {
      headers_.emplace_back("Authorization", "Bearer " + *options_.token);
    }
  }

  // Returns nullopt for an empty repository (HTTP 409).
  std::optional<HttpResponse> get(const std::string& target) {
    auto backoff = options_.initial_backoff;
    for (int attempt = 0;; ++attempt) {
      auto r = detail::http_get(options_.api_base, target, headers_, options_.timeout);
      if (r.status == 200) return r;
      if (r.status == 409) return std::nullopt;
      if (r.status == 401) {
        throw AuthError("GitHub rejected the credentials for " + repo_.str() +
                        " (HTTP 401); check the token in " + kTokenEnvVar +
                        " or passed with --token");
      }
      if (r.status == 404) {
        std::string msg = "repository " + repo_.str() + " not found (HTTP 404)";
        if (!options_.token) {
          msg += "; private repositories need a token in " + std::string(kTokenEnvVar) +
                 " or --token";
        }
        throw NotFoundError(msg);
      }

      const bool rate_limited =
          r.status == 429 ||
          (r.status == 403 && (r.header("x-ratelimit-remaining") == std::optional<std::string>("0") ||
                               r.header("retry-after").has_value()));
      const bool transient = r.status >= 500;
      if (r.status == 403 && !rate_limited) {
        throw AuthError("access to " + repo_.str() + " forbidden (HTTP 403); the token in " +
                        std::string(kTokenEnvVar) + " lacks permission");
      }
      if (!rate_limited && !transient) {
        throw NetworkError("GET " + target + " returned HTTP " + std::to_string(r.status));
      }
      if (attempt >= options_.max_retries) {
        if (rate_limited) {
          const auto reset = header_int(r, "x-ratelimit-reset", 0);
          throw RateLimitError("GitHub rate limit exceeded for " + repo_.str() + " after " +
                                   std::to_string(attempt + 1) +
                                   " attempts; quota resets at unix time " +
                                   std::to_string(reset),
                               reset);
        }
        throw NetworkError("GET " + target + " kept failing with HTTP " +
                           std::to_string(r.status));
      }
      auto wait = backoff;
      if (auto retry_after = header_int(r, "retry-after", -1); retry_after >= 0) {
        wait = std::max(wait, std::chrono::milliseconds(retry_after * 1000));
      }
      std::this_thread::sleep_for(std::min(wait, options_.max_backoff));
      backoff = std::min(backoff * 2, options_.max_backoff);
    }
  }

  std::vector<std::string> list_shas() {
    std::string target = "/repos/" + repo_.owner + "/" + repo_.name +
                         "/commits?per_page=" + std::to_string(options_.per_page);
    if (options_.since) target += "&since=" + options_.since->str() + "-01T00:00:00Z";

    std::vector<std::string> shas;
    while (true) {
      auto r = get(target);
      if (!r) break;
      json page;
      try {
        page = json::parse(r->body);
      } catch (const json::parse_error& e) {
        throw NetworkError("malformed commit listing from " + target + ": " + e.what());
      }
      if (!page.is_array()) throw NetworkError("commit listing from " + target + " is not an array");
      for (const auto& item : page) {
        if (item.contains("sha") && item["sha"].is_string()) shas.push_back(item["sha"]);
      }
      auto next = next_link(r->header("link"));
      if (!next || page.empty()) break;
      target = detail::split_url(*next).second;
    }
    return shas;
  }

  CommitRecord commit_detail(const std::string& sha) {
    const std::string target = "/repos/" + repo_.owner + "/" + repo_.name + "/commits/" + sha;
    auto r = get(target);
    if (!r) throw NetworkError("commit " + sha + " unavailable");
    try {
      const auto j = json::parse(r->body);
      const auto& author = j.at("commit").at("author");
      CommitRecord rec;
      rec.sha = j.at("sha").get<std::string>();
      rec.author_name = author.value("name", "");
      rec.author_email = author.value("email", "");
      rec.timestamp = parse_timestamp(author.at("date").get<std::string>());
      const auto stats = j.value("stats", json::object());
      rec.additions = stats.value("additions", std::int64_t{0});
      rec.deletions = stats.value("deletions", std::int64_t{0});
      if (rec.additions < 0 || rec.deletions < 0) {
        throw NetworkError("negative line stats for commit " + sha);
      }
      const auto identity = canonicalize_author(rec.author_name, rec.author_email);
      rec.author_id = identity.id;
      rec.is_bot = identity.is_bot;
      return rec;
    } catch (const json::exception& e) {
      throw NetworkError("malformed commit " + sha + ": " + e.what());
    } catch (const ParseError& e) {
      throw NetworkError("malformed commit " + sha + ": " + e.what());
    }
  }

 private:
  RepoId repo_;
  FetchOptions options_;
  detail::HttpHeaders headers_;
};

}  // namespace

RepoId RepoId::parse(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos || text.find('/', slash + 1) != std::string::npos) {
    throw Error(ErrorKind::usage, "repository must be owner/name, got '" + text + "'");
  }
  RepoId id{text.substr(0, slash), text.substr(slash + 1)};
  if (!valid_component(id.owner) || !valid_component(id.name)) {
    throw Error(ErrorKind::usage, "invalid repository identifier '" + text + "'");
  }
  return id;
}

std::vector<CommitRecord> fetch_commits(
    const RepoId& repo, CommitCache& cache, const FetchOptions& options,
    const std::function<void(const CommitRecord&)>& on_commit) {
  GitHubSession session(repo, options);
  const auto listed = session.list_shas();

  std::vector<std::string> pending;
  for (const auto& sha : listed) {
    if (!cache.contains(sha)) pending.push_back(sha);
  }
  std::sort(pending.begin(), pending.end());
  pending.erase(std::unique(pending.begin(), pending.end()), pending.end());

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    while (!failed.load()) {
      const auto i = next.fetch_add(1);
      if (i >= pending.size()) return;
      try {
        auto rec = session.commit_detail(pending[i]);
        if (cache.append(rec) && on_commit) on_commit(rec);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };

  const auto n = std::clamp<std::size_t>(options.concurrency, 1, std::max<std::size_t>(pending.size(), 1));
  {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  return cache.records();
}

}  // namespace osslc

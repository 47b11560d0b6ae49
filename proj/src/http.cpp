#include "lmda/http.hpp"

#include <httplib.h>

#include <cstdlib>
#include <thread>

namespace lmda {

namespace {

struct Target {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path without trailing '/'
};

Target split_url(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) throw Error("invalid URL '" + std::string(url) + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  Target t;
  t.origin = std::string(url.substr(0, path_start));
  if (path_start != std::string_view::npos) t.prefix = std::string(url.substr(path_start));
  while (!t.prefix.empty() && t.prefix.back() == '/') t.prefix.pop_back();
  return t;
}

}  // namespace

std::string post_json(std::string_view base_url, std::string_view path, const std::string& body,
                      const Headers& headers, const HttpOptions& options) {
  const auto target = split_url(base_url);
  std::string full_path = target.prefix;
  if (!path.empty() && path.front() != '/') full_path.push_back('/');
  full_path.append(path);

  httplib::Client client(target.origin);
  client.set_connection_timeout(options.timeout);
  client.set_read_timeout(options.timeout);
  client.set_write_timeout(options.timeout);
  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);

  std::string last_error;
  int last_status = 0;
  auto delay = options.retry.base_delay;
  const int attempts = std::max(1, options.retry.attempts);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    auto wait = delay;
    auto res = client.Post(full_path, h, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      last_status = 0;
    } else if (res->status >= 200 && res->status < 300) {
      return res->body;
    } else {
      last_status = res->status;
      last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 300);
      if (res->status == 429 && res->has_header("Retry-After")) {
        const auto seconds = std::atoi(res->get_header_value("Retry-After").c_str());
        wait = std::max(wait, std::chrono::milliseconds(seconds * 1000LL));
      }
    }
    if (attempt < attempts) {
      std::this_thread::sleep_for(wait);
      delay *= 2;
    }
  }
  throw HttpError("POST " + target.origin + full_path + " failed after " + std::to_string(attempts) +
                      " attempts: " + last_error,
                  last_status);
}

std::string secret_from_env(const std::string& variable) {
  if (variable.empty()) return {};
  const char* v = std::getenv(variable.c_str());
  if (!v) throw Error("environment variable '" + variable + "' is not set");
  return v;
}

}  // namespace lmda

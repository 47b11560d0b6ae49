#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lmda/common.hpp"

namespace lmda {

class HttpError : public Error {
 public:
  HttpError(const std::string& what, int status) : Error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds base_delay{500};  // doubled after each failure
};

struct HttpOptions {
  RetryPolicy retry;
  std::chrono::seconds timeout{120};
};

using Headers = std::vector<std::pair<std::string, std::string>>;

// POSTs `body` as application/json to base_url + path. Transport errors and
// non-2xx responses are retried per policy; 429 honours Retry-After (seconds)
// when it exceeds the backoff delay. Returns the response body.
std::string post_json(std::string_view base_url, std::string_view path, const std::string& body,
                      const Headers& headers, const HttpOptions& options);

// Reads a secret from the environment; empty name yields an empty string.
std::string secret_from_env(const std::string& variable);

}  // namespace lmda

// Copyright 2026 The Mnemos Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MNEMOS_HTTP_TRANSPORT_H_
#define MNEMOS_HTTP_TRANSPORT_H_

#include <chrono>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace mnemos {

inline constexpr const char* kAdapterTokenEnv = "MNEMOS_ADAPTER_TOKEN";

// Reads the bearer token from MNEMOS_ADAPTER_TOKEN; empty when unset.
std::string AdapterTokenFromEnvironment();

struct HttpOptions {
  std::string base_url;      // e.g. "http://127.0.0.1:8080"
  std::string bearer_token;  // sent as "Authorization: Bearer ..." if set
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{200};
  std::chrono::seconds connect_timeout{5};
  std::chrono::seconds read_timeout{600};
};

// Small JSON-over-HTTP client. Connection failures and 5xx responses are
// retried with exponential backoff and then reported as transport errors;
// 4xx responses and non-JSON bodies are contract errors. Safe to call from
// several threads (one connection per request).
class HttpTransport {
 public:
  explicit HttpTransport(HttpOptions options);

  nlohmann::json Post(std::string_view path, const nlohmann::json& body) const;
  nlohmann::json Get(std::string_view path) const;

  const HttpOptions& options() const { return options_; }

 private:
  nlohmann::json Send(std::string_view method, std::string_view path,
                      const nlohmann::json* body) const;

  HttpOptions options_;
};

// Field accessors that turn shape problems into contract errors.
const nlohmann::json& RequireField(const nlohmann::json& obj,
                                   std::string_view field,
                                   std::string_view endpoint);
std::string RequireString(const nlohmann::json& obj, std::string_view field,
                          std::string_view endpoint);

}  // namespace mnemos

#endif  // MNEMOS_HTTP_TRANSPORT_H_

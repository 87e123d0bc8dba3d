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

#include "mnemos/http_transport.h"

#include <cstdlib>
#include <thread>
#include <utility>

#include <httplib.h>

#include "mnemos/errors.h"

namespace mnemos {

std::string AdapterTokenFromEnvironment() {
  const char* value = std::getenv(kAdapterTokenEnv);
  return value ? std::string(value) : std::string();
}

HttpTransport::HttpTransport(HttpOptions options) : options_(std::move(options)) {
  if (options_.base_url.empty()) throw ValidationError("empty base URL");
  while (!options_.base_url.empty() && options_.base_url.back() == '/') {
    options_.base_url.pop_back();
  }
  if (options_.max_retries < 0) throw ValidationError("negative retry count");
}

nlohmann::json HttpTransport::Post(std::string_view path,
                                   const nlohmann::json& body) const {
  return Send("POST", path, &body);
}

nlohmann::json HttpTransport::Get(std::string_view path) const {
  return Send("GET", path, nullptr);
}

nlohmann::json HttpTransport::Send(std::string_view method,
                                   std::string_view path,
                                   const nlohmann::json* body) const {
  const std::string endpoint = std::string(method) + " " + std::string(path);
  const std::string payload = body ? body->dump() : std::string();
  httplib::Headers headers;
  if (!options_.bearer_token.empty()) {
    headers.emplace("Authorization", "Bearer " + options_.bearer_token);
  }

  std::string last_failure;
  auto backoff = options_.initial_backoff;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    httplib::Client client(options_.base_url);
    client.set_connection_timeout(options_.connect_timeout);
    client.set_read_timeout(options_.read_timeout);
    client.set_write_timeout(options_.read_timeout);

    httplib::Result result =
        body ? client.Post(std::string(path), headers, payload,
                           "application/json")
             : client.Get(std::string(path), headers);
    if (!result) {
      last_failure = httplib::to_string(result.error());
      continue;
    }
    const int status = result->status;
    if (status >= 500) {
      last_failure = "HTTP " + std::to_string(status);
      continue;
    }
    if (status >= 400 || status < 200) {
      throw ContractError(endpoint + ": HTTP " + std::to_string(status) +
                          (result->body.empty() ? "" : ": " + result->body));
    }
    nlohmann::json parsed =
        nlohmann::json::parse(result->body, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded() || !parsed.is_object()) {
      throw ContractError(endpoint + ": response is not a JSON object");
    }
    return parsed;
  }
  throw TransportError(endpoint + " at " + options_.base_url + " failed after " +
                       std::to_string(options_.max_retries + 1) +
                       " attempts: " + last_failure);
}

const nlohmann::json& RequireField(const nlohmann::json& obj,
                                   std::string_view field,
                                   std::string_view endpoint) {
  auto it = obj.find(std::string(field));
  if (it == obj.end()) {
    throw ContractError(std::string(endpoint) + ": missing field '" +
                        std::string(field) + "'");
  }
  return *it;
}

std::string RequireString(const nlohmann::json& obj, std::string_view field,
                          std::string_view endpoint) {
  const auto& value = RequireField(obj, field, endpoint);
  if (!value.is_string()) {
    throw ContractError(std::string(endpoint) + ": field '" +
                        std::string(field) + "' is not a string");
  }
  return value.get<std::string>();
}

}  // namespace mnemos

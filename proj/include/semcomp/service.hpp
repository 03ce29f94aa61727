/* Copyright 2026 The Semcomp Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <chrono>
#include <cstdlib>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "semcomp/embedding.hpp"
#include "semcomp/error.hpp"

// Client side of the embedding service.
//
//   POST {base}/v1/embed   {"texts": ["...", ...]}
//   200                     {"model": "...", "dim": p, "embeddings": [[p floats], ...]}
//
// One vector per text, in request order.
namespace semcomp::service {

inline constexpr const char* kEmbedPath = "/v1/embed";
inline constexpr const char* kUrlEnvVar = "SEMCOMP_EMBED_URL";

struct FetchOptions {
  std::size_t batch_size = 64;
  int max_attempts = 4;
  std::chrono::milliseconds initial_backoff{50};
  std::chrono::milliseconds max_backoff{1000};
  std::chrono::seconds timeout{60};
};

/// The environment variable, when set and non-empty, wins over `configured`.
inline std::optional<std::string> resolve_url(const std::optional<std::string>& configured) {
  if (const char* env = std::getenv(kUrlEnvVar); env != nullptr && *env != '\0') return std::string(env);
  return configured;
}

namespace detail {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // prefix + /v1/embed
};

inline Endpoint split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) fail(ErrorKind::kInvalidInput, "service URL needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint out;
  out.origin = url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  out.path = prefix + kEmbedPath;
  return out;
}

inline bool transient_status(int status) { return status == 429 || status >= 500; }

}  // namespace detail

inline std::vector<Embedding> fetch_embeddings(const std::vector<std::string>& texts, const std::string& url,
                                               const FetchOptions& options = {}) {
  std::vector<Embedding> out;
  if (texts.empty()) return out;
  if (options.batch_size == 0) fail(ErrorKind::kInvalidInput, "batch size must be positive");
  if (options.max_attempts < 1) fail(ErrorKind::kInvalidInput, "max_attempts must be at least 1");

  const detail::Endpoint endpoint = detail::split_url(url);
  httplib::Client client(endpoint.origin);
  client.set_connection_timeout(options.timeout);
  client.set_read_timeout(options.timeout);
  client.set_write_timeout(options.timeout);

  std::optional<std::size_t> dim;
  out.reserve(texts.size());
  for (std::size_t start = 0; start < texts.size(); start += options.batch_size) {
    const std::size_t end = std::min(texts.size(), start + options.batch_size);
    const nlohmann::json request = {
        {"texts", std::vector<std::string>(texts.begin() + static_cast<std::ptrdiff_t>(start),
                                           texts.begin() + static_cast<std::ptrdiff_t>(end))}};
    const std::string body = request.dump();

    httplib::Result result;
    auto backoff = options.initial_backoff;
    std::string last_problem;
    for (int attempt = 1; attempt <= options.max_attempts; ++attempt) {
      result = client.Post(endpoint.path, body, "application/json");
      if (result && !detail::transient_status(result->status)) break;
      last_problem = result ? "status " + std::to_string(result->status)
                            : "transport error: " + httplib::to_string(result.error());
      if (attempt < options.max_attempts) {
        std::this_thread::sleep_for(backoff);
        backoff = std::min(options.max_backoff, backoff * 2);
      }
    }
    if (!result || detail::transient_status(result->status)) {
      fail(ErrorKind::kService, "embedding service at " + url + " failed after " +
                                    std::to_string(options.max_attempts) + " attempts (" + last_problem + ")");
    }
    if (result->status < 200 || result->status >= 300) {
      fail(ErrorKind::kService, "embedding service returned status " + std::to_string(result->status));
    }

    nlohmann::json response;
    try {
      response = nlohmann::json::parse(result->body);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::kProtocol, std::string("unparseable response: ") + e.what());
    }
    if (!response.is_object() || !response.contains("embeddings") || !response["embeddings"].is_array() ||
        !response.contains("dim") || !response["dim"].is_number_unsigned()) {
      fail(ErrorKind::kProtocol, "response lacks \"dim\" or \"embeddings\"");
    }
    const auto batch_dim = response["dim"].get<std::size_t>();
    if (dim && *dim != batch_dim) {
      fail(ErrorKind::kProtocol, "dimension changed between batches: " + std::to_string(*dim) + " then " +
                                     std::to_string(batch_dim));
    }
    dim = batch_dim;
    const auto& vectors = response["embeddings"];
    if (vectors.size() != end - start) {
      fail(ErrorKind::kProtocol, "asked for " + std::to_string(end - start) + " embeddings, got " +
                                     std::to_string(vectors.size()));
    }
    for (const auto& v : vectors) {
      if (!v.is_array() || v.size() != batch_dim) {
        fail(ErrorKind::kProtocol, "embedding length disagrees with declared dim " + std::to_string(batch_dim));
      }
      std::vector<float> components;
      components.reserve(batch_dim);
      for (const auto& c : v) {
        if (!c.is_number()) fail(ErrorKind::kProtocol, "embedding component is not a number");
        components.push_back(c.get<float>());
      }
      try {
        out.emplace_back(std::move(components));
      } catch (const Error&) {
        fail(ErrorKind::kProtocol, "embedding has non-finite components");
      }
    }
  }
  return out;
}

inline EmbeddingMatrix to_matrix(const std::vector<Embedding>& rows) {
  if (rows.empty()) fail(ErrorKind::kInvalidInput, "no embeddings");
  EmbeddingMatrix out(rows.front().dim());
  for (const auto& r : rows) out.append(r.view());
  return out;
}

}  // namespace semcomp::service

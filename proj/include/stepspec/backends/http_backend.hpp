// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "stepspec/backends/backend.hpp"

namespace stepspec {

struct HttpBackendOptions {
  std::string base_url;  // e.g. http://127.0.0.1:8000
  std::string model;
  std::string api_key_env;  // env var holding the bearer token; may be empty
  double timeout_s = 120.0;
  int max_attempts = 3;
  double initial_backoff_s = 0.5;
  bool send_seed = true;
  // Merged into every request body. Server-side options such as speculative
  // decoding settings go here.
  nlohmann::json extra_body = nlohmann::json::object();
  BackendProfile profile;
};

// Client for POST {base_url}/v1/completions on an OpenAI-compatible server.
// Connection failures and 5xx responses are retried with exponential backoff
// up to max_attempts; 4xx responses fail immediately.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(HttpBackendOptions options);

  const BackendProfile& profile() const override { return options_.profile; }
  GenerationResult generate(const GenerationRequest& req) const override;

  const HttpBackendOptions& options() const { return options_; }

  nlohmann::json request_body(const GenerationRequest& req) const;

 private:
  HttpBackendOptions options_;
  std::string host_;  // scheme://host:port
  std::string path_prefix_;
};

// Parses a /v1/completions response body. Stop strings the server left out
// of the text (reported through a string `stop_reason`) are appended back,
// and a stop on the end-think marker becomes FinishReason::EndThink.
GenerationResult parse_completion_response(const nlohmann::json& body,
                                           const GenerationRequest& req);

}  // namespace stepspec

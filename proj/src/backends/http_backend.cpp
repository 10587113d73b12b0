// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#include "stepspec/backends/http_backend.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <limits>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

namespace stepspec {
namespace {

using nlohmann::json;

void split_url(const std::string& url, std::string& host, std::string& prefix) {
  auto scheme = url.find("://");
  auto path_start = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path_start == std::string::npos) {
    host = url;
    prefix.clear();
  } else {
    host = url.substr(0, path_start);
    prefix = url.substr(path_start);
  }
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
}

}  // namespace

HttpBackend::HttpBackend(HttpBackendOptions options)
    : options_(std::move(options)) {
  if (options_.base_url.empty()) {
    throw std::invalid_argument("http backend: base_url is empty");
  }
  if (options_.max_attempts < 1) {
    throw std::invalid_argument("http backend: max_attempts must be >= 1");
  }
  if (options_.base_url.rfind("https://", 0) == 0) {
    throw std::invalid_argument(
        "http backend: https is not supported; use a plain http endpoint");
  }
  options_.profile.validate();
  split_url(options_.base_url, host_, path_prefix_);
}

json HttpBackend::request_body(const GenerationRequest& req) const {
  json body = {{"model", options_.model},
               {"prompt", req.prompt},
               {"max_tokens", req.max_tokens},
               {"temperature", req.temperature},
               {"stop", req.stop}};
  // Stop at the end of thinking too, so the server does not run on into the
  // answer.
  if (!req.stop.empty() && !req.end_think_marker.empty() &&
      std::find(req.stop.begin(), req.stop.end(), req.end_think_marker) ==
          req.stop.end()) {
    body["stop"].push_back(req.end_think_marker);
  }
  if (req.want_top_logprobs) body["logprobs"] = 10;
  if (options_.send_seed && req.seed_hint) {
    // Many servers take a signed 64-bit seed.
    body["seed"] = static_cast<std::int64_t>(*req.seed_hint >> 1);
  }
  for (const auto& [k, v] : options_.extra_body.items()) body[k] = v;
  return body;
}

GenerationResult HttpBackend::generate(const GenerationRequest& req) const {
  if (req.prompt.empty()) throw std::invalid_argument("empty prompt");
  if (req.max_tokens < 1) throw std::invalid_argument("max_tokens must be >= 1");

  const std::string body = request_body(req).dump();
  httplib::Headers headers;
  if (!options_.api_key_env.empty()) {
    if (const char* key = std::getenv(options_.api_key_env.c_str());
        key && *key) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }

  double backoff = options_.initial_backoff_s;
  std::string last_error;
  for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
    httplib::Client client(host_);
    auto secs = static_cast<time_t>(options_.timeout_s);
    auto usecs = static_cast<time_t>((options_.timeout_s - secs) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    auto start = std::chrono::steady_clock::now();
    auto res = client.Post(path_prefix_ + "/v1/completions", headers, body,
                           "application/json");
    auto elapsed = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start)
                       .count();
    if (res && res->status >= 200 && res->status < 300) {
      json parsed;
      try {
        parsed = json::parse(res->body);
      } catch (const json::parse_error& e) {
        throw BackendMisbehavior(std::string("unparseable completion body: ") +
                                 e.what());
      }
      auto out = parse_completion_response(parsed, req);
      out.measured_latency_s = elapsed;
      return out;
    }
    if (res && res->status >= 400 && res->status < 500) {
      throw TransportError("HTTP " + std::to_string(res->status) + " from " +
                           options_.base_url + ": " + res->body);
    }
    last_error = res ? "HTTP " + std::to_string(res->status)
                     : httplib::to_string(res.error());
    if (attempt < options_.max_attempts) {
      spdlog::warn("completion request to {} failed ({}), retry {}/{}",
                   options_.base_url, last_error, attempt,
                   options_.max_attempts - 1);
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
      backoff *= 2.0;
    }
  }
  throw TransportError("completion request to " + options_.base_url +
                       " failed after " + std::to_string(options_.max_attempts) +
                       " attempts: " + last_error);
}

GenerationResult parse_completion_response(const json& body,
                                           const GenerationRequest& req) {
  if (!body.contains("choices") || !body["choices"].is_array() ||
      body["choices"].empty()) {
    throw BackendMisbehavior("completion response without choices");
  }
  const auto& choice = body["choices"][0];
  if (!choice.contains("text") || !choice["text"].is_string()) {
    throw BackendMisbehavior("completion choice without text");
  }
  std::string text = choice["text"].get<std::string>();
  bool length = choice.contains("finish_reason") &&
                choice["finish_reason"].is_string() &&
                choice["finish_reason"].get<std::string>() == "length";

  bool end_think = false;
  if (choice.contains("stop_reason") && choice["stop_reason"].is_string()) {
    auto stop = choice["stop_reason"].get<std::string>();
    if (stop == req.end_think_marker) {
      end_think = true;
    } else if (!stop.empty() && !std::string_view(text).ends_with(stop)) {
      text += stop;
    }
  }

  auto seg = segment_text(
      text, {req.stop, req.end_think_marker, std::numeric_limits<Tokens>::max()});
  GenerationResult out;
  if (seg.finish == FinishReason::EndThink) end_think = true;
  bool cut = seg.text.size() < text.size();
  out.text = std::move(seg.text);
  out.finish_reason = end_think ? FinishReason::EndThink
                      : length  ? FinishReason::Length
                                : FinishReason::Stop;

  if (!cut && body.contains("usage") && body["usage"].is_object() &&
      body["usage"].contains("completion_tokens") &&
      body["usage"]["completion_tokens"].is_number_integer()) {
    out.token_count = body["usage"]["completion_tokens"].get<Tokens>();
  } else {
    out.token_count = out.text.empty() ? 0 : count_tokens(out.text);
  }
  if (end_think) {
    out.token_count = out.text.empty() ? 0 : count_tokens(out.text);
  }

  if (choice.contains("logprobs") && choice["logprobs"].is_object()) {
    const auto& lp = choice["logprobs"];
    if (lp.contains("top_logprobs") && lp["top_logprobs"].is_array() &&
        !lp["top_logprobs"].empty() && lp["top_logprobs"][0].is_object()) {
      std::map<std::string, double> top;
      for (const auto& [tok, v] : lp["top_logprobs"][0].items()) {
        if (v.is_number()) top[tok] = v.get<double>();
      }
      out.top_logprobs = std::move(top);
    }
  }

  if (out.text.empty() && out.finish_reason == FinishReason::Stop) {
    throw BackendMisbehavior("server returned empty text with finish 'stop'");
  }
  return out;
}

}  // namespace stepspec

// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <string>
#include <thread>

#include "stepspec/backends/sim_backend.hpp"

namespace httplib {
class Server;
}

namespace stepspec::testing {

// In-process /v1/completions server with vLLM conventions: stop strings are
// excluded from the text and reported in `stop_reason`, `logprobs: n` yields
// top_logprobs for each generated position. Models are simulated backends
// keyed by the request's "model" field.
class FakeOpenAiServer {
 public:
  struct Options {
    // Sleep decode_s_per_token per generated token plus prompt tokens over
    // prefill_tokens_per_s before replying.
    bool emulate_timing = false;
    double decode_s_per_token = 0.002;
    double prefill_tokens_per_s = 20000.0;
    // Judge replies carry no digit at all.
    bool garbage_scores = false;
    std::string required_api_key;  // empty: no auth check
  };

  FakeOpenAiServer();
  explicit FakeOpenAiServer(Options options);
  ~FakeOpenAiServer();

  FakeOpenAiServer(const FakeOpenAiServer&) = delete;
  FakeOpenAiServer& operator=(const FakeOpenAiServer&) = delete;

  void add_model(const std::string& name, std::shared_ptr<SimBackend> model);

  // Next n requests fail with HTTP `status` before reaching a model.
  void fail_next(int n, int status = 503);

  void start();
  void stop();

  std::string url() const;
  int requests() const { return requests_.load(); }

 private:
  std::string handle(const std::string& body, const std::string& auth,
                     int& status);

  Options options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  std::map<std::string, std::shared_ptr<SimBackend>> models_;
  std::atomic<int> requests_{0};
  std::atomic<int> failures_left_{0};
  int failure_status_ = 503;
};

}  // namespace stepspec::testing

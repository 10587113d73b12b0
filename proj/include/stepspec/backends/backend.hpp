// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stepspec/core/text.hpp"
#include "stepspec/core/token_model.hpp"
#include "stepspec/core/types.hpp"

namespace stepspec {

struct GenerationRequest {
  std::string prompt;
  Tokens max_tokens = 256;
  double temperature = 0.0;
  std::vector<std::string> stop;
  bool want_top_logprobs = false;
  std::optional<std::uint64_t> seed_hint;
  std::string end_think_marker = "</think>";
};

struct GenerationResult {
  std::string text;
  Tokens token_count = 0;
  FinishReason finish_reason = FinishReason::Stop;
  // First generated position only.
  std::optional<std::map<std::string, double>> top_logprobs;
  Seconds measured_latency_s = 0.0;
};

struct VerificationRequest {
  std::string problem;
  std::string cot_prefix;
  std::string candidate_step;
};

class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Network failure or 5xx after the retry budget, or a non-retryable 4xx.
class TransportError : public BackendError {
 public:
  using BackendError::BackendError;
};

class BackendMisbehavior : public BackendError {
 public:
  using BackendError::BackendError;
};

class ScoreParseFailure : public BackendError {
 public:
  using BackendError::BackendError;
};

class UnsupportedBackend : public BackendError {
 public:
  using BackendError::BackendError;
};

// A model server. Implementations are safe to call from many trajectories at
// once.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual const BackendProfile& profile() const = 0;
  virtual GenerationResult generate(const GenerationRequest& req) const = 0;

  // True when latencies come from the cost model rather than the wall clock.
  virtual bool simulated() const { return false; }

  virtual bool supports_token_level() const { return false; }

  // Greedy token oracle reproducing generate(req) one token at a time.
  virtual std::unique_ptr<TokenModel> target_model(
      const GenerationRequest& req) const;

  // Drafter that proposes tokens for `target` on the same request.
  virtual std::unique_ptr<TokenModel> draft_model(
      const GenerationRequest& req, const TokenModel& target) const;
};

}  // namespace stepspec

// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "stepspec/core/types.hpp"
#include "stepspec/simlab/sim_model.hpp"

namespace stepspec::simlab {

// decoded * decode_s_per_token + prefilled / prefill_tokens_per_s
Seconds step_latency(const BackendProfile& profile, Tokens decoded,
                     Tokens prefilled);

// Inputs of the per-step cost model. Each speculated step costs a small-model
// decode, then a base-model pass that prefills the candidate plus the judge
// instructions and decodes one token. A rejected step adds a base-model
// decode, and the small model later prefills the regenerated step.
struct StepCostModel {
  SimModelSpec small = default_small_model();
  SimModelSpec base = default_base_model();
  Tokens verify_tail_tokens = 60;  // judge instructions after the candidate

  double expected_small_tokens() const {
    return static_cast<double>(kStepFixedTokens) + small.verbosity;
  }
  double expected_base_tokens() const {
    return static_cast<double>(kStepFixedTokens) + base.verbosity;
  }
};

struct StepLatencyTerms {
  Seconds speculate = 0;
  Seconds verify = 0;
  Seconds regenerate = 0;
  Seconds total = 0;  // speculate + verify + (1 - alpha) * regenerate
};

StepLatencyTerms expected_step_latency(double alpha, const StepCostModel& model);

// Expected per-step latency when the base model decodes every step itself.
Seconds expected_base_only_step_latency(const StepCostModel& model);

struct MonteCarloLatency {
  Seconds mean = 0;
  Seconds base_only_mean = 0;
  double accept_rate = 0;
  std::size_t steps = 0;
};

// Draws `steps` steps from the simulated models (step text lengths from
// simulate_step_text, acceptance ~ Bernoulli(alpha)) and averages the cost.
MonteCarloLatency monte_carlo_step_latency(double alpha,
                                           const StepCostModel& model,
                                           std::size_t steps,
                                           std::uint64_t seed);

}  // namespace stepspec::simlab

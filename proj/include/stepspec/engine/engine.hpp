// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stepspec/backends/backend.hpp"
#include "stepspec/backends/prompt.hpp"
#include "stepspec/core/text.hpp"
#include "stepspec/core/types.hpp"
#include "stepspec/specdecode/specdecode.hpp"

namespace stepspec::engine {

enum class StepAction { AcceptedSpeculation, RejectedThenRegenerated, ForcedBase };

std::string_view to_string(StepAction a);
StepAction parse_step_action(std::string_view s);

struct StepOutcome {
  ReasoningStep step;
  StepAction action = StepAction::ForcedBase;
  // Token-level rounds when the step came out of speculative decoding.
  std::vector<specdecode::DraftRound> rounds;
};

struct TrajectoryTotals {
  Seconds latency_s = 0;         // sum of retained step totals + answer phase
  Seconds answer_latency_s = 0;  // end-think turn + final answer
  Tokens thinking_tokens = 0;
  std::size_t retained_steps = 0;
  std::size_t speculator_steps = 0;
  std::size_t forced_steps = 0;
  std::size_t rejected_count = 0;
  std::size_t score_parse_failures = 0;
  bool budget_exhausted = false;

  // Share of retained steps produced by the speculator; nullopt when the run
  // did not speculate or retained nothing.
  std::optional<double> accepted_fraction;
};

struct TrajectoryResult {
  TrajectoryState state;
  std::vector<StepOutcome> outcomes;
  std::vector<ReasoningStep> rejected_steps;
  TrajectoryTotals totals;
};

struct EngineOptions {
  VerificationTemplate verification = VerificationTemplate::builtin();
};

// Segments a raw stream into one step under the config's boundaries.
Segment segment_step(std::string_view stream, const EngineConfig& config);

bool force_first_n(const EngineConfig& config, std::size_t step_index);

// Seed hints keep each call of a trajectory on its own random substream. The
// base model's generation hint for step i is the same whether it is forced,
// regenerating a rejected step, or running without speculation.
enum class CallPurpose : std::uint64_t {
  Draft = 1,
  Generate = 2,
  Judge = 3,
  Answer = 4,
};
std::uint64_t seed_hint(std::uint64_t seed, CallPurpose purpose,
                        std::size_t index);

// The speculate / verify / accept-or-regenerate loop, followed by the base
// model's final answer.
TrajectoryResult run_trajectory(const EngineConfig& config,
                                const std::string& problem,
                                const Backend& small, const Backend& base,
                                const EngineOptions& options = {});

// Single-model reasoning with the same step structure and budget rules. With
// a drafter, every step goes through token-level speculative decoding.
// `purpose` picks the seed substream: Generate for a base model, Draft to
// replay what a speculator would have proposed.
TrajectoryResult run_single_model(const EngineConfig& config,
                                  const std::string& problem,
                                  const Backend& model,
                                  const Backend* drafter = nullptr,
                                  CallPurpose purpose = CallPurpose::Generate);

}  // namespace stepspec::engine

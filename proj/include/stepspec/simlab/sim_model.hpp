// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "stepspec/core/rng.hpp"
#include "stepspec/core/serialize.hpp"
#include "stepspec/simlab/chain_task.hpp"

namespace stepspec::simlab {

// Tokens every step line carries besides filler: "Step k:" and "x = v.".
inline constexpr Tokens kStepFixedTokens = 5;

struct SimModelSpec {
  double per_step_error_prob = 0.0;
  double verbosity = 10.0;  // mean filler tokens per step
  BackendProfile profile;
  double reflection_prob = 0.0;
  // Probability the model, drafting tokens for another model, proposes that
  // model's next token. Only used for token-level speculative decoding.
  double token_agreement = 0.7;
  // Per-step error when the answer phase has to finish steps the thinking
  // phase never reached.
  double answer_error_prob = 0.3;

  void validate() const;
  bool operator==(const SimModelSpec&) const = default;
};

struct SimJudgeSpec {
  UtilityScore correct_score{9};
  int wrong_score_max = 3;
  double noise = 0.05;  // P(wrong step scored as correct_score)

  void validate() const;
  bool operator==(const SimJudgeSpec&) const = default;
};

SimModelSpec default_small_model();
SimModelSpec default_base_model();

struct SimStep {
  std::string text;
  bool correct = true;
  bool reflected = false;
  std::int64_t claimed = 0;
};

// Emits the line for update `i` (0-based), continuing from `prior_claimed`.
// A step is correct when its claimed value is the update applied to the prior
// claim or the true state; a reflection step always restores the true state.
SimStep simulate_step_text(const SimModelSpec& spec, const ChainTask& task,
                           std::size_t i, std::int64_t prior_claimed, Rng& rng);

UtilityScore simulate_judge_score(const SimJudgeSpec& judge, bool correct,
                                  Rng& rng);

bool step_is_valid(const ChainTask& task, std::size_t i,
                   std::int64_t prior_claimed, std::int64_t claimed);

// What a simulated model reads back out of a chain of thought.
struct CotView {
  std::size_t steps_done = 0;
  std::optional<std::int64_t> last_claim;  // from the last step that has one
};

CotView read_cot(std::string_view cot);

// Claimed value in a single step line, if any.
std::optional<std::int64_t> read_claim(std::string_view step);

// State the next step builds on: last claim, or the task's start value.
std::int64_t prior_claim(const ChainTask& task, const CotView& view);

// Answer-phase text: finishes any unreached updates (erring at
// answer_error_prob each) and reports \boxed{value}.
std::string simulate_answer(const SimModelSpec& spec, const ChainTask& task,
                            const CotView& view, Rng& rng);

// Extracts the integer inside the last \boxed{...}, if any.
std::optional<std::string> extract_boxed(std::string_view text);

void to_json(json& j, const SimModelSpec& s);
void from_json(const json& j, SimModelSpec& s);
void to_json(json& j, const SimJudgeSpec& s);
void from_json(const json& j, SimJudgeSpec& s);

SimModelSpec sim_model_from_json(const json& j, const std::string& path,
                                 const SimModelSpec& defaults);
SimJudgeSpec sim_judge_from_json(const json& j, const std::string& path);

}  // namespace stepspec::simlab

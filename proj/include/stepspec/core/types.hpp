// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stepspec {

using Tokens = std::int64_t;
using Seconds = double;

// Single-digit verdict a base model emits for a candidate step.
class UtilityScore {
 public:
  static constexpr int kMin = 0;
  static constexpr int kMax = 9;

  constexpr UtilityScore() = default;
  explicit UtilityScore(int value);

  constexpr int value() const { return value_; }
  friend constexpr auto operator<=>(UtilityScore, UtilityScore) = default;

 private:
  int value_ = 0;
};

// 0 accepts every candidate; 10 sits above the maximum score and rejects all.
class AcceptanceThreshold {
 public:
  static constexpr int kMin = 0;
  static constexpr int kMax = 10;
  static constexpr int kAcceptAll = 0;
  static constexpr int kRejectAll = 10;

  constexpr AcceptanceThreshold() = default;
  explicit AcceptanceThreshold(int value);

  constexpr int value() const { return value_; }
  friend constexpr auto operator<=>(AcceptanceThreshold,
                                    AcceptanceThreshold) = default;

 private:
  int value_ = 7;
};

enum class StepProducer { Speculator, Base, BaseForced };
enum class Decision { Accept, Reject };
enum class Phase { Thinking, Answering, Done };
enum class BackendRole { Small, Base };

struct LatencyBreakdown {
  Seconds speculate_s = 0.0;
  Seconds verify_s = 0.0;
  Seconds fallback_s = 0.0;

  Seconds total() const { return speculate_s + verify_s + fallback_s; }
  bool operator==(const LatencyBreakdown&) const = default;
};

struct ReasoningStep {
  std::size_t index = 0;
  std::string text;
  Tokens token_count = 0;
  StepProducer producer = StepProducer::Base;
  std::optional<UtilityScore> score;  // present iff producer == Speculator
  bool accepted = false;
  bool truncated = false;  // ended at max_step_tokens or at the budget
  LatencyBreakdown latency;

  bool operator==(const ReasoningStep&) const = default;
};

struct BackendProfile {
  std::string name;
  BackendRole role = BackendRole::Base;
  double decode_s_per_token = 0.05;
  double prefill_tokens_per_s = 2000.0;

  void validate() const;
  bool operator==(const BackendProfile&) const = default;
};

struct EngineConfig {
  AcceptanceThreshold threshold{7};
  int force_first_n = 0;
  Tokens token_budget = 8192;
  double temperature = 0.6;
  int draft_length = 5;
  bool hierarchical = false;
  std::uint64_t seed = 0;
  Tokens max_step_tokens = 256;
  std::vector<std::string> step_stop_markers = {"\n\n", ".\n", "?\n", "!\n"};
  std::string end_think_marker = "</think>";
  Tokens answer_max_tokens = 64;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
  bool operator==(const EngineConfig&) const = default;
};

// The evolving chain of thought for one problem. Only the owning engine loop
// mutates it; every mutation re-checks the budget and phase invariants.
class TrajectoryState {
 public:
  TrajectoryState() = default;
  TrajectoryState(std::string problem, Tokens budget);

  const std::string& problem() const { return problem_; }
  const std::vector<ReasoningStep>& retained_steps() const { return steps_; }
  Tokens thinking_tokens_used() const { return used_; }
  Tokens budget() const { return budget_; }
  Tokens remaining() const { return budget_ - used_; }
  Phase phase() const { return phase_; }
  const std::optional<std::string>& final_answer() const {
    return final_answer_;
  }

  // Concatenated text of the retained steps.
  std::string cot() const;

  // Throws std::logic_error if the step is rejected, overflows the budget, or
  // arrives outside the thinking phase.
  void retain(ReasoningStep step);
  void begin_answer();
  void finish(std::string answer);

  // Empty when all invariants hold.
  std::vector<std::string> violations() const;

  bool operator==(const TrajectoryState&) const = default;

 private:
  friend struct TrajectoryStateAccess;

  std::string problem_;
  std::vector<ReasoningStep> steps_;
  Tokens used_ = 0;
  Phase phase_ = Phase::Thinking;
  Tokens budget_ = 8192;
  std::optional<std::string> final_answer_;
};

Decision decide_acceptance(UtilityScore score, AcceptanceThreshold threshold);

Seconds total_latency(const ReasoningStep& step);

std::string_view to_string(StepProducer p);
std::string_view to_string(Decision d);
std::string_view to_string(Phase p);
std::string_view to_string(BackendRole r);

StepProducer parse_step_producer(std::string_view s);
Phase parse_phase(std::string_view s);
BackendRole parse_backend_role(std::string_view s);

}  // namespace stepspec

// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#include "stepspec/core/types.hpp"

#include <string>

namespace stepspec {

UtilityScore::UtilityScore(int value) : value_(value) {
  if (value < kMin || value > kMax) {
    throw std::out_of_range("utility score must be in [0, 9], got " +
                            std::to_string(value));
  }
}

AcceptanceThreshold::AcceptanceThreshold(int value) : value_(value) {
  if (value < kMin || value > kMax) {
    throw std::out_of_range("acceptance threshold must be in [0, 10], got " +
                            std::to_string(value));
  }
}

void BackendProfile::validate() const {
  if (!(decode_s_per_token > 0.0)) {
    throw std::invalid_argument("profile '" + name +
                                "': decode_s_per_token must be > 0");
  }
  if (!(prefill_tokens_per_s > 0.0)) {
    throw std::invalid_argument("profile '" + name +
                                "': prefill_tokens_per_s must be > 0");
  }
}

void EngineConfig::validate() const {
  if (force_first_n < 0) {
    throw std::invalid_argument("force_first_n must be >= 0");
  }
  if (token_budget < 1) throw std::invalid_argument("token_budget must be >= 1");
  if (!(temperature >= 0.0)) {
    throw std::invalid_argument("temperature must be >= 0");
  }
  if (draft_length < 1) throw std::invalid_argument("draft_length must be >= 1");
  if (max_step_tokens < 1) {
    throw std::invalid_argument("max_step_tokens must be >= 1");
  }
  if (answer_max_tokens < 1) {
    throw std::invalid_argument("answer_max_tokens must be >= 1");
  }
  for (const auto& m : step_stop_markers) {
    if (m.empty()) throw std::invalid_argument("step_stop_markers: empty marker");
  }
  if (end_think_marker.empty()) {
    throw std::invalid_argument("end_think_marker must be non-empty");
  }
}

TrajectoryState::TrajectoryState(std::string problem, Tokens budget)
    : problem_(std::move(problem)), budget_(budget) {
  if (budget < 1) throw std::invalid_argument("token budget must be >= 1");
}

std::string TrajectoryState::cot() const {
  std::string out;
  for (const auto& s : steps_) out += s.text;
  return out;
}

void TrajectoryState::retain(ReasoningStep step) {
  if (phase_ != Phase::Thinking) {
    throw std::logic_error("retain() outside the thinking phase");
  }
  if (!step.accepted) throw std::logic_error("retain() of a rejected step");
  if (used_ + step.token_count > budget_) {
    throw std::logic_error("retaining step " + std::to_string(step.index) +
                           " would exceed the token budget");
  }
  used_ += step.token_count;
  steps_.push_back(std::move(step));
}

void TrajectoryState::begin_answer() {
  if (phase_ != Phase::Thinking) {
    throw std::logic_error("answer phase may only follow thinking");
  }
  phase_ = Phase::Answering;
}

void TrajectoryState::finish(std::string answer) {
  if (phase_ != Phase::Answering) {
    throw std::logic_error("finish() requires the answering phase");
  }
  final_answer_ = std::move(answer);
  phase_ = Phase::Done;
}

std::vector<std::string> TrajectoryState::violations() const {
  std::vector<std::string> out;
  Tokens sum = 0;
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    const auto& s = steps_[i];
    sum += s.token_count;
    if (!s.accepted) out.push_back("step " + std::to_string(i) + " not accepted");
    if (s.score.has_value() != (s.producer == StepProducer::Speculator)) {
      out.push_back("step " + std::to_string(i) +
                    ": score presence does not match producer");
    }
    if (!s.text.empty() && s.token_count < 1) {
      out.push_back("step " + std::to_string(i) + ": non-empty text, 0 tokens");
    }
    if (s.latency.speculate_s < 0 || s.latency.verify_s < 0 ||
        s.latency.fallback_s < 0) {
      out.push_back("step " + std::to_string(i) + ": negative latency");
    }
  }
  if (sum != used_) out.push_back("thinking_tokens_used != sum of step tokens");
  if (used_ > budget_) out.push_back("thinking_tokens_used exceeds budget");
  if (phase_ == Phase::Done && !final_answer_) {
    out.push_back("phase Done without a final answer");
  }
  if (phase_ != Phase::Done && final_answer_) {
    out.push_back("final answer present before phase Done");
  }
  return out;
}

Decision decide_acceptance(UtilityScore score, AcceptanceThreshold threshold) {
  return score.value() >= threshold.value() ? Decision::Accept
                                            : Decision::Reject;
}

Seconds total_latency(const ReasoningStep& step) { return step.latency.total(); }

std::string_view to_string(StepProducer p) {
  switch (p) {
    case StepProducer::Speculator: return "Speculator";
    case StepProducer::Base: return "Base";
    case StepProducer::BaseForced: return "BaseForced";
  }
  return "Base";
}

std::string_view to_string(Decision d) {
  return d == Decision::Accept ? "Accept" : "Reject";
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Thinking: return "Thinking";
    case Phase::Answering: return "Answering";
    case Phase::Done: return "Done";
  }
  return "Thinking";
}

std::string_view to_string(BackendRole r) {
  return r == BackendRole::Small ? "Small" : "Base";
}

StepProducer parse_step_producer(std::string_view s) {
  if (s == "Speculator") return StepProducer::Speculator;
  if (s == "Base") return StepProducer::Base;
  if (s == "BaseForced") return StepProducer::BaseForced;
  throw std::invalid_argument("unknown step producer: " + std::string(s));
}

Phase parse_phase(std::string_view s) {
  if (s == "Thinking") return Phase::Thinking;
  if (s == "Answering") return Phase::Answering;
  if (s == "Done") return Phase::Done;
  throw std::invalid_argument("unknown phase: " + std::string(s));
}

BackendRole parse_backend_role(std::string_view s) {
  if (s == "Small") return BackendRole::Small;
  if (s == "Base") return BackendRole::Base;
  throw std::invalid_argument("unknown backend role: " + std::string(s));
}

}  // namespace stepspec

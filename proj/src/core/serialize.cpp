// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#include "stepspec/core/serialize.hpp"

namespace stepspec {

ObjectReader::ObjectReader(const json& j, std::string path)
    : j_(j), path_(std::move(path)) {
  if (!j_.is_object()) throw SchemaError(path_, "expected a JSON object");
}

void ObjectReader::finish() const {
  for (const auto& [key, _] : j_.items()) {
    if (!seen_.count(key)) throw SchemaError(child(key), "unknown key");
  }
}

void to_json(json& j, const UtilityScore& s) { j = s.value(); }
void from_json(const json& j, UtilityScore& s) {
  s = UtilityScore(j.get<int>());
}

void to_json(json& j, const AcceptanceThreshold& t) { j = t.value(); }
void from_json(const json& j, AcceptanceThreshold& t) {
  t = AcceptanceThreshold(j.get<int>());
}

void to_json(json& j, StepProducer p) { j = std::string(to_string(p)); }
void from_json(const json& j, StepProducer& p) {
  p = parse_step_producer(j.get<std::string>());
}

void to_json(json& j, Phase p) { j = std::string(to_string(p)); }
void from_json(const json& j, Phase& p) { p = parse_phase(j.get<std::string>()); }

void to_json(json& j, BackendRole r) { j = std::string(to_string(r)); }
void from_json(const json& j, BackendRole& r) {
  r = parse_backend_role(j.get<std::string>());
}

void to_json(json& j, const LatencyBreakdown& l) {
  j = json{{"speculate_s", l.speculate_s},
           {"verify_s", l.verify_s},
           {"fallback_s", l.fallback_s}};
}
void from_json(const json& j, LatencyBreakdown& l) {
  ObjectReader r(j, "latency");
  r.required("speculate_s", l.speculate_s);
  r.required("verify_s", l.verify_s);
  r.required("fallback_s", l.fallback_s);
  r.finish();
}

void to_json(json& j, const ReasoningStep& s) {
  j = json{{"index", s.index},
           {"text", s.text},
           {"token_count", s.token_count},
           {"producer", s.producer},
           {"score", s.score ? json(s.score->value()) : json(nullptr)},
           {"accepted", s.accepted},
           {"truncated", s.truncated},
           {"latency", s.latency}};
}
void from_json(const json& j, ReasoningStep& s) {
  ObjectReader r(j, "step");
  r.required("index", s.index);
  r.required("text", s.text);
  r.required("token_count", s.token_count);
  r.required("producer", s.producer);
  const auto& score = r.raw("score");
  s.score = score.is_null() ? std::nullopt
                            : std::optional<UtilityScore>(score.get<UtilityScore>());
  r.required("accepted", s.accepted);
  r.optional("truncated", s.truncated);
  r.required("latency", s.latency);
  r.finish();
}

void to_json(json& j, const BackendProfile& p) {
  j = json{{"name", p.name},
           {"role", p.role},
           {"decode_s_per_token", p.decode_s_per_token},
           {"prefill_tokens_per_s", p.prefill_tokens_per_s}};
}
void from_json(const json& j, BackendProfile& p) {
  p = backend_profile_from_json(j, "");
}

BackendProfile backend_profile_from_json(const json& j,
                                         const std::string& path) {
  BackendProfile p;
  ObjectReader r(j, path);
  r.optional("name", p.name);
  r.optional("role", p.role);
  r.optional("decode_s_per_token", p.decode_s_per_token);
  r.optional("prefill_tokens_per_s", p.prefill_tokens_per_s);
  r.finish();
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(path, e.what());
  }
  return p;
}

void to_json(json& j, const EngineConfig& c) {
  j = json{{"threshold", c.threshold},
           {"force_first_n", c.force_first_n},
           {"token_budget", c.token_budget},
           {"temperature", c.temperature},
           {"draft_length", c.draft_length},
           {"hierarchical", c.hierarchical},
           {"seed", c.seed},
           {"max_step_tokens", c.max_step_tokens},
           {"step_stop_markers", c.step_stop_markers},
           {"end_think_marker", c.end_think_marker},
           {"answer_max_tokens", c.answer_max_tokens}};
}
void from_json(const json& j, EngineConfig& c) {
  c = engine_config_from_json(j, "");
}

EngineConfig engine_config_from_json(const json& j, const std::string& path) {
  EngineConfig c;
  ObjectReader r(j, path);
  r.optional("threshold", c.threshold);
  r.optional("force_first_n", c.force_first_n);
  r.optional("token_budget", c.token_budget);
  r.optional("temperature", c.temperature);
  r.optional("draft_length", c.draft_length);
  r.optional("hierarchical", c.hierarchical);
  r.optional("seed", c.seed);
  r.optional("max_step_tokens", c.max_step_tokens);
  r.optional("step_stop_markers", c.step_stop_markers);
  r.optional("end_think_marker", c.end_think_marker);
  r.optional("answer_max_tokens", c.answer_max_tokens);
  r.finish();
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(path, e.what());
  }
  return c;
}

struct TrajectoryStateAccess {
  static void assign(TrajectoryState& t, std::string problem,
                     std::vector<ReasoningStep> steps, Tokens used, Phase phase,
                     Tokens budget, std::optional<std::string> answer) {
    t.problem_ = std::move(problem);
    t.steps_ = std::move(steps);
    t.used_ = used;
    t.phase_ = phase;
    t.budget_ = budget;
    t.final_answer_ = std::move(answer);
  }
};

void to_json(json& j, const TrajectoryState& t) {
  j = json{{"problem", t.problem()},
           {"retained_steps", t.retained_steps()},
           {"thinking_tokens_used", t.thinking_tokens_used()},
           {"phase", t.phase()},
           {"budget", t.budget()},
           {"final_answer", t.final_answer() ? json(*t.final_answer())
                                             : json(nullptr)}};
}

void from_json(const json& j, TrajectoryState& t) {
  ObjectReader r(j, "trajectory");
  std::string problem;
  std::vector<ReasoningStep> steps;
  Tokens used = 0;
  Phase phase = Phase::Thinking;
  Tokens budget = 0;
  r.required("problem", problem);
  r.required("retained_steps", steps);
  r.required("thinking_tokens_used", used);
  r.required("phase", phase);
  r.required("budget", budget);
  const auto& answer = r.raw("final_answer");
  r.finish();
  TrajectoryStateAccess::assign(
      t, std::move(problem), std::move(steps), used, phase, budget,
      answer.is_null() ? std::nullopt
                       : std::optional<std::string>(answer.get<std::string>()));
  auto bad = t.violations();
  if (!bad.empty()) throw SchemaError("trajectory", bad.front());
}

}  // namespace stepspec

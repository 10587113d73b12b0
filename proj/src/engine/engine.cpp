// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#include "stepspec/engine/engine.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <stdexcept>

#include "stepspec/backends/score.hpp"
#include "stepspec/core/rng.hpp"
#include "stepspec/simlab/latency_model.hpp"

namespace stepspec::engine {
namespace {

// What one backend has already processed. Simulated backends are charged by
// the cost model for the prompt tokens they have not seen yet; live backends
// report wall-clock time.
class Meter {
 public:
  explicit Meter(const Backend& backend) : backend_(backend) {}

  Seconds charge(const std::string& prompt, const GenerationResult& result,
                 Tokens decoded) {
    Seconds s = result.measured_latency_s;
    if (backend_.simulated()) {
      s = simlab::step_latency(backend_.profile(), decoded,
                               count_new_prompt_tokens(context_, prompt));
    }
    context_ = prompt + result.text;
    return s;
  }

  // Prefill cost of `prompt` alone, for token-level regeneration where the
  // decode cost is accounted round by round.
  Seconds charge_prefill(const std::string& prompt, const std::string& output) {
    Seconds s = simlab::step_latency(backend_.profile(), 0,
                                     count_new_prompt_tokens(context_, prompt));
    context_ = prompt + output;
    return s;
  }

 private:
  const Backend& backend_;
  std::string context_;
};

GenerationRequest step_request(const EngineConfig& config,
                               const std::string& prompt, Tokens cap,
                               std::uint64_t hint) {
  GenerationRequest req;
  req.prompt = prompt;
  req.max_tokens = cap;
  req.temperature = config.temperature;
  req.stop = config.step_stop_markers;
  req.seed_hint = hint;
  req.end_think_marker = config.end_think_marker;
  return req;
}

void check_step_result(const GenerationResult& r, Tokens cap,
                       std::string_view who) {
  if (r.token_count > cap) {
    throw BackendMisbehavior(std::string(who) + " returned " +
                             std::to_string(r.token_count) +
                             " tokens for a cap of " + std::to_string(cap));
  }
  if (r.text.empty() && r.finish_reason != FinishReason::EndThink) {
    throw BackendMisbehavior(std::string(who) + " returned an empty step");
  }
}

struct Generated {
  GenerationResult result;
  std::vector<specdecode::DraftRound> rounds;
  Seconds latency = 0;
};

// Base-model step from the retained prefix, through token-level speculation
// when asked and available.
Generated base_step(const EngineConfig& config, const GenerationRequest& req,
                    const Backend& base, Meter& base_meter,
                    const Backend* drafter, Meter* drafter_meter) {
  Generated g;
  if (drafter && drafter->supports_token_level() &&
      base.supports_token_level()) {
    auto regen = specdecode::regenerate_with_specdecode(*drafter, base, req,
                                                        config.draft_length);
    g.latency = base_meter.charge_prefill(req.prompt, regen.result.text) +
                drafter_meter->charge_prefill(req.prompt, regen.result.text) +
                regen.rounds_latency;
    g.result = std::move(regen.result);
    g.rounds = std::move(regen.rounds);
    return g;
  }
  // Live servers run token-level speculation themselves when configured to.
  g.result = base.generate(req);
  g.latency = base_meter.charge(req.prompt, g.result, g.result.token_count);
  return g;
}

struct Loop {
  const EngineConfig& config;
  TrajectoryResult out;
  bool thinking = true;

  Loop(const EngineConfig& c, const std::string& problem)
      : config(c), out{TrajectoryState(problem, c.token_budget), {}, {}, {}} {}

  Tokens cap() const {
    return std::min(config.max_step_tokens, out.state.remaining());
  }

  std::size_t index() const { return out.state.retained_steps().size(); }

  void retain(ReasoningStep step, StepAction action, FinishReason finish,
              std::vector<specdecode::DraftRound> rounds = {}) {
    step.accepted = true;
    step.truncated = finish == FinishReason::Length;
    out.state.retain(step);
    out.outcomes.push_back({std::move(step), action, std::move(rounds)});
    if (finish == FinishReason::EndThink) thinking = false;
    if (out.state.remaining() <= 0) {
      out.totals.budget_exhausted = true;
      thinking = false;
    }
  }

  void answer(const std::string& problem, const Backend& base, Meter& meter,
              Seconds carried) {
    out.state.begin_answer();
    GenerationRequest req;
    req.prompt = render_answer_prompt(problem, out.state.cot(),
                                      config.end_think_marker);
    req.max_tokens = config.answer_max_tokens;
    req.temperature = config.temperature;
    req.seed_hint = seed_hint(config.seed, CallPurpose::Answer, 0);
    req.end_think_marker = config.end_think_marker;
    auto r = base.generate(req);
    Seconds s = meter.charge(req.prompt, r, r.token_count);
    out.state.finish(r.text);
    out.totals.answer_latency_s = carried + s;
  }

  void finalize(bool speculated) {
    auto& t = out.totals;
    t.thinking_tokens = out.state.thinking_tokens_used();
    t.retained_steps = out.outcomes.size();
    t.latency_s = 0;
    for (const auto& o : out.outcomes) {
      t.latency_s += o.step.latency.total();
      if (o.step.producer == StepProducer::Speculator) ++t.speculator_steps;
      if (o.action == StepAction::ForcedBase &&
          o.step.producer == StepProducer::BaseForced) {
        ++t.forced_steps;
      }
    }
    t.latency_s += t.answer_latency_s;
    t.rejected_count = out.rejected_steps.size();
    if (speculated && t.retained_steps > 0) {
      t.accepted_fraction = static_cast<double>(t.speculator_steps) /
                            static_cast<double>(t.retained_steps);
    }
  }
};

}  // namespace

std::string_view to_string(StepAction a) {
  switch (a) {
    case StepAction::AcceptedSpeculation: return "AcceptedSpeculation";
    case StepAction::RejectedThenRegenerated: return "RejectedThenRegenerated";
    case StepAction::ForcedBase: return "ForcedBase";
  }
  return "ForcedBase";
}

StepAction parse_step_action(std::string_view s) {
  if (s == "AcceptedSpeculation") return StepAction::AcceptedSpeculation;
  if (s == "RejectedThenRegenerated") return StepAction::RejectedThenRegenerated;
  if (s == "ForcedBase") return StepAction::ForcedBase;
  throw std::invalid_argument("unknown step action: " + std::string(s));
}

Segment segment_step(std::string_view stream, const EngineConfig& config) {
  return segment_text(stream, {config.step_stop_markers,
                               config.end_think_marker, config.max_step_tokens});
}

bool force_first_n(const EngineConfig& config, std::size_t step_index) {
  return config.force_first_n > 0 &&
         step_index < static_cast<std::size_t>(config.force_first_n);
}

std::uint64_t seed_hint(std::uint64_t seed, CallPurpose purpose,
                        std::size_t index) {
  return derive_seed(seed, {static_cast<std::uint64_t>(purpose),
                            static_cast<std::uint64_t>(index)});
}

TrajectoryResult run_trajectory(const EngineConfig& config,
                                const std::string& problem,
                                const Backend& small, const Backend& base,
                                const EngineOptions& options) {
  config.validate();
  if (small.profile().role != BackendRole::Small) {
    throw std::invalid_argument("speculator backend must have role Small");
  }
  if (base.profile().role != BackendRole::Base) {
    throw std::invalid_argument("base backend must have role Base");
  }

  Loop loop(config, problem);
  Meter small_meter(small), base_meter(base);
  const Backend* drafter = config.hierarchical ? &small : nullptr;
  Seconds carried = 0;  // turns that ended thinking without producing a step

  while (loop.thinking) {
    const std::size_t idx = loop.index();
    const Tokens cap = loop.cap();
    const std::string prompt =
        render_generation_prompt(problem, loop.out.state.cot());
    auto base_req = step_request(
        config, prompt, cap, seed_hint(config.seed, CallPurpose::Generate, idx));

    if (force_first_n(config, idx)) {
      auto g = base_step(config, base_req, base, base_meter, drafter,
                         &small_meter);
      check_step_result(g.result, cap, "base");
      if (g.result.text.empty()) {
        carried += g.latency;
        break;
      }
      ReasoningStep step;
      step.index = idx;
      step.text = g.result.text;
      step.token_count = g.result.token_count;
      step.producer = StepProducer::BaseForced;
      step.latency.fallback_s = g.latency;
      loop.retain(std::move(step), StepAction::ForcedBase,
                  g.result.finish_reason, std::move(g.rounds));
      continue;
    }

    // Speculate.
    auto spec_req = step_request(
        config, prompt, cap, seed_hint(config.seed, CallPurpose::Draft, idx));
    auto cand = small.generate(spec_req);
    check_step_result(cand, cap, "speculator");
    Seconds speculate_s = small_meter.charge(prompt, cand, cand.token_count);
    if (cand.text.empty()) {
      carried += speculate_s;
      break;
    }

    // Verify: prefill the candidate and the instructions, decode one token.
    VerificationRequest vreq{problem, loop.out.state.cot(), cand.text};
    auto judge_req = make_score_request(
        vreq, options.verification,
        seed_hint(config.seed, CallPurpose::Judge, idx));
    auto verdict = base.generate(judge_req);
    Seconds verify_s = base_meter.charge(judge_req.prompt, verdict, 1);
    auto score = extract_score(verdict);
    Decision decision = Decision::Reject;
    if (score) {
      decision = decide_acceptance(*score, config.threshold);
    } else {
      ++loop.out.totals.score_parse_failures;
      spdlog::warn("step {}: unparseable judge output \"{}\", rejecting", idx,
                   verdict.text);
    }

    ReasoningStep candidate;
    candidate.index = idx;
    candidate.text = cand.text;
    candidate.token_count = cand.token_count;
    candidate.producer = StepProducer::Speculator;
    candidate.score = score;  // absent when the verdict did not parse
    candidate.truncated = cand.finish_reason == FinishReason::Length;
    candidate.latency.speculate_s = speculate_s;
    candidate.latency.verify_s = verify_s;

    if (decision == Decision::Accept) {
      loop.retain(std::move(candidate), StepAction::AcceptedSpeculation,
                  cand.finish_reason);
      continue;
    }

    // Reject: discard the candidate and regenerate from the same prefix.
    candidate.accepted = false;
    loop.out.rejected_steps.push_back(candidate);
    auto g = base_step(config, base_req, base, base_meter, drafter,
                       &small_meter);
    check_step_result(g.result, cap, "base");
    if (g.result.text.empty()) {
      carried += speculate_s + verify_s + g.latency;
      break;
    }
    ReasoningStep step;
    step.index = idx;
    step.text = g.result.text;
    step.token_count = g.result.token_count;
    step.producer = StepProducer::Base;
    step.latency = {speculate_s, verify_s, g.latency};
    loop.retain(std::move(step), StepAction::RejectedThenRegenerated,
                g.result.finish_reason, std::move(g.rounds));
  }

  loop.answer(problem, base, base_meter, carried);
  loop.finalize(true);
  return std::move(loop.out);
}

TrajectoryResult run_single_model(const EngineConfig& config,
                                  const std::string& problem,
                                  const Backend& model, const Backend* drafter,
                                  CallPurpose purpose) {
  config.validate();
  Loop loop(config, problem);
  Meter meter(model);
  std::optional<Meter> drafter_meter;
  if (drafter) drafter_meter.emplace(*drafter);
  Seconds carried = 0;

  while (loop.thinking) {
    const std::size_t idx = loop.index();
    const Tokens cap = loop.cap();
    auto req = step_request(config,
                            render_generation_prompt(problem, loop.out.state.cot()),
                            cap, seed_hint(config.seed, purpose, idx));
    auto g = base_step(config, req, model, meter, drafter,
                       drafter_meter ? &*drafter_meter : nullptr);
    check_step_result(g.result, cap, "model");
    if (g.result.text.empty()) {
      carried += g.latency;
      break;
    }
    ReasoningStep step;
    step.index = idx;
    step.text = g.result.text;
    step.token_count = g.result.token_count;
    step.producer = StepProducer::Base;
    step.latency.fallback_s = g.latency;
    loop.retain(std::move(step), StepAction::ForcedBase, g.result.finish_reason,
                std::move(g.rounds));
  }

  // The final answer comes from the model under test; for a speculator-only
  // run that is the small model.
  loop.answer(problem, model, meter, carried);
  loop.finalize(false);
  return std::move(loop.out);
}

}  // namespace stepspec::engine

// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#include "stepspec/backends/sim_backend.hpp"

#include <cmath>
#include <vector>

#include "stepspec/backends/prompt.hpp"
#include "stepspec/core/rng.hpp"

namespace stepspec {
namespace {

bool is_judge_prompt(std::string_view prompt) {
  auto end = prompt.find_last_not_of(" \t\r\n");
  if (end == std::string_view::npos) return false;
  return prompt.substr(0, end + 1).ends_with(kScoreInstructionLine);
}

// Text after the opening of the thinking block, or the whole prompt.
std::string_view thinking_text(std::string_view prompt) {
  auto pos = prompt.find(kThinkOpen);
  if (pos == std::string_view::npos) return prompt;
  return prompt.substr(pos + kThinkOpen.size());
}

class ScriptedTarget final : public TokenModel {
 public:
  explicit ScriptedTarget(std::vector<Token> pieces)
      : pieces_(std::move(pieces)) {}

  Token next_token(std::span<const Token>,
                   std::span<const Token> generated) const override {
    if (generated.size() < pieces_.size()) return pieces_[generated.size()];
    return kEndOfStream;
  }

 private:
  std::vector<Token> pieces_;
};

// Proposes the target's token with probability `agreement` per position.
class NoisyDraft final : public TokenModel {
 public:
  NoisyDraft(const TokenModel& target, double agreement, std::uint64_t seed)
      : target_(target), agreement_(agreement), seed_(seed) {}

  Token next_token(std::span<const Token> prefix,
                   std::span<const Token> generated) const override {
    Token t = target_.next_token(prefix, generated);
    auto rng = make_rng(derive_seed(seed_, {generated.size()}));
    if (uniform01(rng) < agreement_) return t;
    return t == "hmm " ? Token("okay ") : Token("hmm ");
  }

 private:
  const TokenModel& target_;
  double agreement_;
  std::uint64_t seed_;
};

}  // namespace

SimBackend::SimBackend(simlab::SimModelSpec model,
                       std::optional<simlab::SimJudgeSpec> judge,
                       std::uint64_t seed)
    : model_(std::move(model)), judge_(std::move(judge)), seed_(seed) {
  model_.validate();
  if (judge_) judge_->validate();
}

Rng SimBackend::request_rng(const GenerationRequest& req) const {
  return make_rng(
      derive_seed(seed_, {req.seed_hint.value_or(0), fnv1a(req.prompt)}));
}

std::string SimBackend::raw_stream(const GenerationRequest& req) const {
  auto task = simlab::parse_problem(req.prompt);
  if (!task) {
    throw BackendMisbehavior("simulated backend '" + model_.profile.name +
                             "': prompt does not contain a chain task");
  }
  auto rng = request_rng(req);

  if (is_judge_prompt(req.prompt)) {
    if (!judge_) {
      throw BackendMisbehavior("simulated backend '" + model_.profile.name +
                               "' has no judge configured");
    }
    // The candidate is the last step line; everything above it is context.
    std::string_view prompt(req.prompt);
    std::size_t cand_pos = std::string_view::npos;
    for (std::size_t pos = 0; pos < prompt.size();) {
      auto nl = prompt.find('\n', pos);
      auto line = prompt.substr(pos, nl == std::string_view::npos
                                         ? std::string_view::npos
                                         : nl - pos);
      if (simlab::read_cot(line).steps_done == 1) cand_pos = pos;
      if (nl == std::string_view::npos) break;
      pos = nl + 1;
    }
    bool correct = false;
    if (cand_pos != std::string_view::npos) {
      auto context = simlab::read_cot(prompt.substr(0, cand_pos));
      auto nl = prompt.find('\n', cand_pos);
      auto claim = simlab::read_claim(prompt.substr(
          cand_pos, nl == std::string_view::npos ? nl : nl - cand_pos));
      std::size_t i = context.steps_done;
      correct = claim && i < task->length() &&
                simlab::step_is_valid(*task, i,
                                      simlab::prior_claim(*task, context),
                                      *claim);
    }
    auto score = simlab::simulate_judge_score(*judge_, correct, rng);
    return std::string(1, static_cast<char>('0' + score.value()));
  }

  auto thinking = thinking_text(req.prompt);
  auto close = thinking.find(req.end_think_marker);
  if (close != std::string_view::npos) {
    auto view = simlab::read_cot(thinking.substr(0, close));
    return simlab::simulate_answer(model_, *task, view, rng);
  }

  auto view = simlab::read_cot(thinking);
  if (view.steps_done >= task->length()) return req.end_think_marker;
  return simlab::simulate_step_text(model_, *task, view.steps_done,
                                    simlab::prior_claim(*task, view), rng)
      .text;
}

GenerationResult SimBackend::generate(const GenerationRequest& req) const {
  if (req.prompt.empty()) throw std::invalid_argument("empty prompt");
  if (req.max_tokens < 1) throw std::invalid_argument("max_tokens must be >= 1");

  GenerationResult out;
  auto stream = raw_stream(req);
  if (is_judge_prompt(req.prompt)) {
    out.text = stream;
    out.token_count = 1;
    out.finish_reason =
        req.max_tokens == 1 ? FinishReason::Length : FinishReason::Stop;
    if (req.want_top_logprobs) {
      out.top_logprobs = std::map<std::string, double>{{stream, std::log(0.9)}};
    }
    return out;
  }
  auto seg = segment_text(stream, {req.stop, req.end_think_marker, req.max_tokens});
  out.text = std::move(seg.text);
  out.token_count = seg.token_count;
  out.finish_reason = seg.finish;
  return out;
}

std::unique_ptr<TokenModel> SimBackend::target_model(
    const GenerationRequest& req) const {
  if (is_judge_prompt(req.prompt)) {
    throw UnsupportedBackend("token-level decoding of judge prompts");
  }
  return std::make_unique<ScriptedTarget>(token_pieces(raw_stream(req)));
}

std::unique_ptr<TokenModel> SimBackend::draft_model(
    const GenerationRequest& req, const TokenModel& target) const {
  auto seed = derive_seed(
      seed_, {req.seed_hint.value_or(0), fnv1a(req.prompt), fnv1a("draft")});
  return std::make_unique<NoisyDraft>(target, model_.token_agreement, seed);
}

}  // namespace stepspec

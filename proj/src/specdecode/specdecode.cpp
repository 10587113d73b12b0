// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#include "stepspec/specdecode/specdecode.hpp"

#include <algorithm>
#include <stdexcept>

#include "stepspec/simlab/latency_model.hpp"

namespace stepspec::specdecode {
namespace {

bool is_done(const StopRule& stop, std::span<const Token> out) {
  return out.size() >= stop.max_new_tokens || (stop.done && stop.done(out));
}

}  // namespace

DecodeOutput speculative_decode(const TokenModel& draft,
                                const TokenModel& target,
                                std::span<const Token> prefix, int gamma,
                                const StopRule& stop) {
  if (gamma < 1) throw std::invalid_argument("draft length must be >= 1");
  DecodeOutput out;
  auto& gen = out.tokens;
  std::vector<Token> scratch;

  while (!is_done(stop, gen)) {
    DraftRound round;
    const std::size_t room =
        std::min<std::size_t>(gamma, stop.max_new_tokens - gen.size());

    scratch = gen;
    for (std::size_t k = 0; k < room; ++k) {
      Token t = draft.next_token(prefix, scratch);
      if (t == kEndOfStream) break;
      scratch.push_back(t);
      round.drafted.push_back(std::move(t));
      if (stop.done && stop.done(scratch)) break;
    }

    // Verify against the target's greedy choice at each drafted position.
    scratch = gen;
    bool mismatch = false;
    for (const auto& t : round.drafted) {
      Token want = target.next_token(prefix, scratch);
      if (want != t) {
        round.bonus_token = std::move(want);
        mismatch = true;
        break;
      }
      scratch.push_back(t);
      ++round.accepted_prefix_len;
    }
    gen.insert(gen.end(), round.drafted.begin(),
               round.drafted.begin() + static_cast<std::ptrdiff_t>(
                                           round.accepted_prefix_len));
    if (!mismatch && !is_done(stop, gen)) {
      round.bonus_token = target.next_token(prefix, gen);
    }
    if (round.bonus_token && *round.bonus_token == kEndOfStream) {
      round.bonus_token.reset();
      out.end_of_stream = true;
    }
    if (round.bonus_token) gen.push_back(*round.bonus_token);
    out.rounds.push_back(std::move(round));
    if (out.end_of_stream) break;
  }
  return out;
}

DecodeOutput greedy_decode(const TokenModel& target,
                           std::span<const Token> prefix,
                           const StopRule& stop) {
  DecodeOutput out;
  while (!is_done(stop, out.tokens)) {
    Token t = target.next_token(prefix, out.tokens);
    if (t == kEndOfStream) {
      out.end_of_stream = true;
      break;
    }
    out.tokens.push_back(std::move(t));
  }
  return out;
}

Seconds round_latency(const DraftRound& round, const BackendProfile& draft,
                      const BackendProfile& target) {
  auto n = static_cast<Tokens>(round.drafted.size());
  return simlab::step_latency(draft, n, 0) + simlab::step_latency(target, 1, n);
}

Regeneration regenerate_with_specdecode(const Backend& draft,
                                        const Backend& target,
                                        const GenerationRequest& req,
                                        int gamma) {
  if (!draft.supports_token_level() || !target.supports_token_level()) {
    throw UnsupportedBackend(
        "token-level speculative decoding needs simulated backends");
  }
  auto target_lm = target.target_model(req);
  auto draft_lm = draft.draft_model(req, *target_lm);

  std::vector<std::string> markers = req.stop;
  markers.push_back(req.end_think_marker);
  StopRule stop;
  stop.max_new_tokens = static_cast<std::size_t>(req.max_tokens);
  stop.done = [&markers](std::span<const Token> gen) {
    std::string text;
    for (const auto& t : gen) text += t;
    return std::any_of(markers.begin(), markers.end(), [&](const auto& m) {
      return !m.empty() && text.find(m) != std::string::npos;
    });
  };

  auto prompt_tokens = token_pieces(req.prompt);
  auto decoded =
      speculative_decode(*draft_lm, *target_lm, prompt_tokens, gamma, stop);

  std::string joined;
  for (const auto& t : decoded.tokens) joined += t;
  auto seg = segment_text(joined, {req.stop, req.end_think_marker, req.max_tokens});

  Regeneration out;
  out.result.text = std::move(seg.text);
  out.result.token_count = seg.token_count;
  out.result.finish_reason = seg.finish;
  // Stopped on the token cap with nothing else ending the step: it is a
  // truncation only if the target had more to say.
  if (seg.finish == FinishReason::Stop && !decoded.end_of_stream &&
      decoded.tokens.size() == stop.max_new_tokens && !stop.done(decoded.tokens) &&
      target_lm->next_token(prompt_tokens, decoded.tokens) != kEndOfStream) {
    out.result.finish_reason = FinishReason::Length;
  }
  for (const auto& r : decoded.rounds) {
    out.rounds_latency += round_latency(r, draft.profile(), target.profile());
  }
  out.rounds = std::move(decoded.rounds);
  return out;
}

}  // namespace stepspec::specdecode

// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "stepspec/backends/backend.hpp"
#include "stepspec/core/token_model.hpp"

namespace stepspec::specdecode {

// One draft/verify round. Tokens appended = accepted_prefix_len, plus one
// when bonus_token is set (it is unset only when the accepted drafts already
// satisfied the stop rule, or the target ended the stream).
struct DraftRound {
  std::vector<Token> drafted;
  std::size_t accepted_prefix_len = 0;
  std::optional<Token> bonus_token;

  std::size_t appended() const {
    return accepted_prefix_len + (bonus_token ? 1 : 0);
  }
};

struct StopRule {
  std::size_t max_new_tokens = 256;
  // Called with everything generated so far; true ends decoding.
  std::function<bool(std::span<const Token>)> done;
};

struct DecodeOutput {
  std::vector<Token> tokens;
  std::vector<DraftRound> rounds;
  bool end_of_stream = false;
};

// Greedy speculative decoding: the draft proposes up to `gamma` tokens, the
// target keeps the longest prefix matching its own argmax and adds one token
// of its own. The output equals greedy_decode(target, ...) exactly.
DecodeOutput speculative_decode(const TokenModel& draft,
                                const TokenModel& target,
                                std::span<const Token> prefix, int gamma,
                                const StopRule& stop);

// Target-only greedy decoding; the losslessness reference.
DecodeOutput greedy_decode(const TokenModel& target,
                           std::span<const Token> prefix, const StopRule& stop);

// Draft decodes the drafted tokens; the target runs one pass that prefills
// them and decodes one token.
Seconds round_latency(const DraftRound& round, const BackendProfile& draft,
                      const BackendProfile& target);

struct Regeneration {
  GenerationResult result;  // identical to target.generate(req) text-wise
  std::vector<DraftRound> rounds;
  Seconds rounds_latency = 0;  // excludes prompt prefill
};

// Base-model step regeneration through token-level speculation with the small
// model as drafter. Throws UnsupportedBackend when either side lacks
// token-level access.
Regeneration regenerate_with_specdecode(const Backend& draft,
                                        const Backend& target,
                                        const GenerationRequest& req, int gamma);

}  // namespace stepspec::specdecode

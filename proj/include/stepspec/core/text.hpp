// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "stepspec/core/types.hpp"

namespace stepspec {

// Simulated tokenizer: one token per whitespace-delimited unit. A non-empty
// all-whitespace string counts as a single token.
Tokens count_tokens(std::string_view text);

// Splits text into pieces whose concatenation is the original text. Each
// piece is one token plus its trailing whitespace; leading whitespace is
// folded into the first piece. pieces.size() == count_tokens(text).
std::vector<std::string> token_pieces(std::string_view text);

// Tokens of `next` not covered by the longest whole-token common prefix with
// `prev`. This is what a prefix-caching server has to prefill.
Tokens count_new_prompt_tokens(std::string_view prev, std::string_view next);

enum class FinishReason { Stop, Length, EndThink };

std::string_view to_string(FinishReason r);
FinishReason parse_finish_reason(std::string_view s);

struct SegmentRules {
  std::vector<std::string> stop_markers;
  std::string end_think_marker = "</think>";
  Tokens max_tokens = 256;
};

struct Segment {
  std::string text;
  Tokens token_count = 0;
  FinishReason finish = FinishReason::Stop;
};

// Cuts the first step out of a generated stream. The step ends right after
// the earliest stop marker (plus any newlines that immediately follow it),
// just before the end-think marker, or after max_tokens tokens, whichever
// comes first. The end-think marker itself is not part of the step.
Segment segment_text(std::string_view stream, const SegmentRules& rules);

}  // namespace stepspec

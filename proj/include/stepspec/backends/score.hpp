// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>

#include "stepspec/backends/backend.hpp"
#include "stepspec/backends/prompt.hpp"

namespace stepspec {

// Reads a utility score out of a one-token judge completion:
//   1. argmax over the single-digit entries of top_logprobs (surrounding
//      whitespace ignored, non-digit entries skipped; ties go to the lower
//      digit),
//   2. otherwise the first digit character of the sampled text,
//   3. otherwise nothing.
std::optional<UtilityScore> extract_score(const GenerationResult& result);

// The one-token, temperature-0 request the judge receives.
GenerationRequest make_score_request(const VerificationRequest& req,
                                     const VerificationTemplate& tmpl,
                                     std::optional<std::uint64_t> seed_hint);

// Renders the judge prompt, asks `backend` for one token and parses it.
// Throws ScoreParseFailure when no digit can be recovered.
UtilityScore score_step(const Backend& backend, const VerificationRequest& req,
                        const VerificationTemplate& tmpl,
                        std::optional<std::uint64_t> seed_hint = std::nullopt);

}  // namespace stepspec

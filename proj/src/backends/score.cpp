// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#include "stepspec/backends/score.hpp"

#include <cctype>
#include <stdexcept>

namespace stepspec {
namespace {

std::optional<int> single_digit(std::string_view token) {
  auto b = token.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return std::nullopt;
  auto e = token.find_last_not_of(" \t\r\n");
  token = token.substr(b, e - b + 1);
  if (token.size() != 1 || !std::isdigit(static_cast<unsigned char>(token[0]))) {
    return std::nullopt;
  }
  return token[0] - '0';
}

}  // namespace

std::optional<UtilityScore> extract_score(const GenerationResult& result) {
  if (result.top_logprobs) {
    std::optional<int> best;
    double best_lp = 0;
    for (const auto& [tok, lp] : *result.top_logprobs) {
      auto d = single_digit(tok);
      if (!d) continue;
      if (!best || lp > best_lp || (lp == best_lp && *d < *best)) {
        best = d;
        best_lp = lp;
      }
    }
    if (best) return UtilityScore(*best);
  }
  for (char c : result.text) {
    if (std::isdigit(static_cast<unsigned char>(c))) return UtilityScore(c - '0');
  }
  return std::nullopt;
}

GenerationRequest make_score_request(const VerificationRequest& req,
                                     const VerificationTemplate& tmpl,
                                     std::optional<std::uint64_t> seed_hint) {
  GenerationRequest g;
  g.prompt = tmpl.render(req);
  g.max_tokens = 1;
  g.temperature = 0.0;
  g.want_top_logprobs = true;
  g.seed_hint = seed_hint;
  return g;
}

UtilityScore score_step(const Backend& backend, const VerificationRequest& req,
                        const VerificationTemplate& tmpl,
                        std::optional<std::uint64_t> seed_hint) {
  if (backend.profile().role != BackendRole::Base) {
    throw std::invalid_argument("score_step: backend '" +
                                backend.profile().name + "' is not a base model");
  }
  auto result = backend.generate(make_score_request(req, tmpl, seed_hint));
  auto score = extract_score(result);
  if (!score) {
    throw ScoreParseFailure("no digit in judge output: \"" + result.text + "\"");
  }
  return *score;
}

}  // namespace stepspec

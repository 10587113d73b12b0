// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>

#include "stepspec/backends/backend.hpp"

namespace stepspec {

inline constexpr std::string_view kThinkOpen = "<think>\n";
inline constexpr std::string_view kScoreInstructionLine =
    "Respond with a single digit 0-9:";

// problem, then the opened thinking block and the retained steps.
std::string render_generation_prompt(std::string_view problem,
                                     std::string_view cot);

// Generation prompt with the thinking block closed.
std::string render_answer_prompt(std::string_view problem, std::string_view cot,
                                 std::string_view end_think_marker);

// Judge prompt with {problem}, {cot_prefix} and {candidate_step}
// placeholders. The default starts with the generation prompt so a server
// with prefix caching only prefills the candidate and the instructions.
class VerificationTemplate {
 public:
  // Built-in template (assets/verify_prompt_v1.txt).
  static VerificationTemplate builtin();

  // Throws std::invalid_argument unless every placeholder appears exactly
  // once and the text ends with kScoreInstructionLine.
  VerificationTemplate(std::string version, std::string text);

  const std::string& version() const { return version_; }
  const std::string& text() const { return text_; }

  std::string render(const VerificationRequest& req) const;

  // Tokens after {candidate_step}: the per-verification fixed prefill.
  Tokens tail_tokens() const;

 private:
  std::string version_;
  std::string text_;
};

}  // namespace stepspec

// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#include "stepspec/backends/prompt.hpp"

#include <array>
#include <stdexcept>

namespace stepspec {

// Defined in the generated prompt_assets.cpp.
extern const char* const kVerifyPromptV1;

namespace {

constexpr std::array<std::string_view, 3> kPlaceholders = {
    "{problem}", "{cot_prefix}", "{candidate_step}"};

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

}  // namespace

std::string render_generation_prompt(std::string_view problem,
                                     std::string_view cot) {
  std::string out;
  out.reserve(problem.size() + cot.size() + 16);
  out += problem;
  out += '\n';
  out += kThinkOpen;
  out += cot;
  return out;
}

std::string render_answer_prompt(std::string_view problem, std::string_view cot,
                                 std::string_view end_think_marker) {
  std::string out = render_generation_prompt(problem, cot);
  out += end_think_marker;
  out += "\n\n";
  return out;
}

VerificationTemplate VerificationTemplate::builtin() {
  return VerificationTemplate("v1", kVerifyPromptV1);
}

VerificationTemplate::VerificationTemplate(std::string version,
                                           std::string text)
    : version_(std::move(version)), text_(std::move(text)) {
  for (auto p : kPlaceholders) {
    if (count_occurrences(text_, p) != 1) {
      throw std::invalid_argument("verification template must contain " +
                                  std::string(p) + " exactly once");
    }
  }
  auto end = text_.find_last_not_of(" \t\r\n");
  std::string_view trimmed(text_.data(), end == std::string::npos ? 0 : end + 1);
  if (!trimmed.ends_with(kScoreInstructionLine)) {
    throw std::invalid_argument(
        "verification template must end with the line \"" +
        std::string(kScoreInstructionLine) + "\"");
  }
}

std::string VerificationTemplate::render(const VerificationRequest& req) const {
  if (req.candidate_step.empty()) {
    throw std::invalid_argument("verification request: empty candidate step");
  }
  // Single left-to-right pass so placeholder-like text inside the
  // substituted values is never expanded.
  std::string out;
  out.reserve(text_.size() + req.problem.size() + req.cot_prefix.size() +
              req.candidate_step.size());
  std::size_t i = 0;
  while (i < text_.size()) {
    bool replaced = false;
    if (text_[i] == '{') {
      std::string_view rest(text_.data() + i, text_.size() - i);
      if (rest.starts_with("{problem}")) {
        out += req.problem;
        i += 9;
        replaced = true;
      } else if (rest.starts_with("{cot_prefix}")) {
        out += req.cot_prefix;
        i += 12;
        replaced = true;
      } else if (rest.starts_with("{candidate_step}")) {
        out += req.candidate_step;
        i += 16;
        replaced = true;
      }
    }
    if (!replaced) out += text_[i++];
  }
  return out;
}

Tokens VerificationTemplate::tail_tokens() const {
  auto pos = text_.find("{candidate_step}");
  return count_tokens(std::string_view(text_).substr(pos + 16));
}

}  // namespace stepspec

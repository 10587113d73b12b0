// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#include "stepspec/core/text.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace stepspec {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)); }

struct Span {
  std::size_t gap_begin;  // start of the whitespace run preceding the token
  std::size_t begin;
  std::size_t end;
};

std::vector<Span> token_spans(std::string_view text) {
  std::vector<Span> spans;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t gap = i;
    while (i < text.size() && is_space(text[i])) ++i;
    if (i == text.size()) break;
    std::size_t b = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    spans.push_back({gap, b, i});
  }
  return spans;
}

}  // namespace

Tokens count_tokens(std::string_view text) {
  Tokens n = 0;
  bool in_token = false;
  for (char c : text) {
    if (is_space(c)) {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++n;
    }
  }
  if (n == 0 && !text.empty()) return 1;
  return n;
}

std::vector<std::string> token_pieces(std::string_view text) {
  std::vector<std::string> pieces;
  if (text.empty()) return pieces;
  auto spans = token_spans(text);
  if (spans.empty()) {
    pieces.emplace_back(text);
    return pieces;
  }
  for (std::size_t k = 0; k < spans.size(); ++k) {
    std::size_t b = k == 0 ? 0 : spans[k].begin;
    std::size_t e = k + 1 < spans.size() ? spans[k + 1].begin : text.size();
    pieces.emplace_back(text.substr(b, e - b));
  }
  return pieces;
}

Tokens count_new_prompt_tokens(std::string_view prev, std::string_view next) {
  if (prev == next) return 0;
  auto a = token_spans(prev);
  auto b = token_spans(next);
  std::size_t matched = 0;
  while (matched < a.size() && matched < b.size()) {
    const auto& x = a[matched];
    const auto& y = b[matched];
    if (prev.substr(x.gap_begin, x.end - x.gap_begin) !=
        next.substr(y.gap_begin, y.end - y.gap_begin)) {
      break;
    }
    ++matched;
  }
  return count_tokens(next) - static_cast<Tokens>(matched);
}

std::string_view to_string(FinishReason r) {
  switch (r) {
    case FinishReason::Stop: return "stop";
    case FinishReason::Length: return "length";
    case FinishReason::EndThink: return "end_think";
  }
  return "stop";
}

FinishReason parse_finish_reason(std::string_view s) {
  if (s == "stop") return FinishReason::Stop;
  if (s == "length") return FinishReason::Length;
  if (s == "end_think") return FinishReason::EndThink;
  throw std::invalid_argument("unknown finish reason: " + std::string(s));
}

Segment segment_text(std::string_view stream, const SegmentRules& rules) {
  std::size_t cut = stream.size();
  FinishReason finish = FinishReason::Stop;

  std::size_t best_start = std::string_view::npos;
  std::size_t best_end = 0;
  for (const auto& m : rules.stop_markers) {
    if (m.empty()) continue;
    auto pos = stream.find(m);
    if (pos == std::string_view::npos) continue;
    if (pos < best_start || (pos == best_start && pos + m.size() > best_end)) {
      best_start = pos;
      best_end = pos + m.size();
    }
  }
  if (best_start != std::string_view::npos) {
    while (best_end < stream.size() &&
           (stream[best_end] == '\n' || stream[best_end] == '\r')) {
      ++best_end;
    }
    cut = best_end;
  }

  if (!rules.end_think_marker.empty()) {
    auto et = stream.find(rules.end_think_marker);
    if (et != std::string_view::npos && et < cut) {
      cut = et;
      finish = FinishReason::EndThink;
    }
  }

  Segment seg;
  seg.text = std::string(stream.substr(0, cut));
  seg.token_count = seg.text.empty() ? 0 : count_tokens(seg.text);
  seg.finish = finish;

  if (rules.max_tokens >= 0 && seg.token_count > rules.max_tokens) {
    auto pieces = token_pieces(seg.text);
    std::string truncated;
    for (Tokens i = 0; i < rules.max_tokens; ++i) truncated += pieces[i];
    seg.text = std::move(truncated);
    seg.token_count = rules.max_tokens;
    seg.finish = FinishReason::Length;
  }
  return seg;
}

}  // namespace stepspec

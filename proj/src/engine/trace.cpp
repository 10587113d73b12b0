// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#include "stepspec/engine/trace.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

namespace stepspec::engine {
namespace {

json with_tag(json rec, const json& tag) {
  for (auto it = tag.begin(); it != tag.end(); ++it) rec[it.key()] = it.value();
  return rec;
}

bool close(double a, double b) {
  return std::fabs(a - b) <= 1e-9 * std::max({1.0, std::fabs(a), std::fabs(b)});
}

}  // namespace

std::vector<json> trace_records(const TrajectoryResult& result,
                                const json& tag) {
  std::vector<json> out;
  std::size_t r = 0;
  const auto& rejected = result.rejected_steps;
  for (const auto& o : result.outcomes) {
    const auto& s = o.step;
    json rec = {
        {"kind", "step"},
        {"index", s.index},
        {"producer", to_string(s.producer)},
        {"score", s.score ? json(s.score->value()) : json(nullptr)},
        {"action", to_string(o.action)},
        {"token_count", s.token_count},
        {"truncated", s.truncated},
        {"speculate_s", s.latency.speculate_s},
        {"verify_s", s.latency.verify_s},
        {"fallback_s", s.latency.fallback_s},
    };
    if (o.action == StepAction::RejectedThenRegenerated) {
      while (r < rejected.size() && rejected[r].index < s.index) ++r;
      if (r < rejected.size() && rejected[r].index == s.index) {
        rec["rejected_score"] = rejected[r].score ? json(rejected[r].score->value())
                                                  : json(nullptr);
        rec["rejected_token_count"] = rejected[r].token_count;
      }
    }
    if (!o.rounds.empty()) {
      json rounds = json::array();
      for (const auto& d : o.rounds) {
        rounds.push_back({{"drafted", d.drafted.size()},
                          {"accepted", d.accepted_prefix_len}});
      }
      rec["rounds"] = std::move(rounds);
    }
    out.push_back(with_tag(std::move(rec), tag));
  }
  const auto& t = result.totals;
  json fin = {
      {"kind", "trajectory"},
      {"steps", result.outcomes.size()},
      {"rejected", t.rejected_count},
      {"thinking_tokens", t.thinking_tokens},
      {"token_budget", result.state.budget()},
      {"budget_exhausted", t.budget_exhausted},
      {"score_parse_failures", t.score_parse_failures},
      {"answer_latency_s", t.answer_latency_s},
      {"latency_s", t.latency_s},
      {"final_answer", result.state.final_answer()
                           ? json(*result.state.final_answer())
                           : json(nullptr)},
  };
  out.push_back(with_tag(std::move(fin), tag));
  return out;
}

void write_trace(std::ostream& os, const TrajectoryResult& result,
                 const json& tag) {
  for (const auto& rec : trace_records(result, tag)) os << rec.dump() << '\n';
}

TraceSummary summarize_trace(const std::vector<json>& records) {
  TraceSummary s;
  for (const auto& rec : records) {
    const auto kind = rec.at("kind").get<std::string>();
    if (kind == "trajectory") {
      s.budget = rec.at("token_budget").get<Tokens>();
      s.latency_s += rec.at("answer_latency_s").get<double>();
      continue;
    }
    ++s.steps;
    s.thinking_tokens += rec.at("token_count").get<Tokens>();
    s.latency_s += rec.at("speculate_s").get<double>() +
                   rec.at("verify_s").get<double>() +
                   rec.at("fallback_s").get<double>();
    const auto action = parse_step_action(rec.at("action").get<std::string>());
    if (action == StepAction::AcceptedSpeculation) ++s.accepted;
    if (action == StepAction::RejectedThenRegenerated) ++s.rejected;
    if (rec.at("producer") == "BaseForced") ++s.forced;
  }
  return s;
}

std::vector<std::string> validate_trace(const std::vector<json>& records) {
  std::vector<std::string> bad;
  if (records.empty() || records.back().value("kind", "") != "trajectory") {
    bad.push_back("missing closing trajectory record");
    return bad;
  }
  const auto& fin = records.back();
  Tokens used = 0;
  const Tokens budget = fin.at("token_budget").get<Tokens>();
  for (std::size_t i = 0; i + 1 < records.size(); ++i) {
    const auto& rec = records[i];
    const std::string at = "record " + std::to_string(i);
    if (rec.at("index").get<std::size_t>() != i) bad.push_back(at + ": index out of order");
    const auto producer = parse_step_producer(rec.at("producer").get<std::string>());
    const auto action = parse_step_action(rec.at("action").get<std::string>());
    const auto& score = rec.at("score");
    if ((producer == StepProducer::Speculator) != !score.is_null()) {
      bad.push_back(at + ": score presence does not match producer");
    }
    if (!score.is_null() && (score.get<int>() < 0 || score.get<int>() > 9)) {
      bad.push_back(at + ": score outside 0..9");
    }
    if ((action == StepAction::AcceptedSpeculation) !=
        (producer == StepProducer::Speculator)) {
      bad.push_back(at + ": action does not match producer");
    }
    if (rec.contains("rejected_score") && !rec["rejected_score"].is_null()) {
      int v = rec["rejected_score"].get<int>();
      if (v < 0 || v > 9) bad.push_back(at + ": rejected score outside 0..9");
    }
    used += rec.at("token_count").get<Tokens>();
    if (used > budget) bad.push_back(at + ": thinking tokens exceed the budget");
  }
  auto s = summarize_trace(records);
  if (s.thinking_tokens != fin.at("thinking_tokens").get<Tokens>()) {
    bad.push_back("thinking_tokens does not match the step records");
  }
  if (!close(s.latency_s, fin.at("latency_s").get<double>())) {
    bad.push_back("latency_s does not equal the sum of step latencies and answer");
  }
  return bad;
}

std::vector<json> read_jsonl(std::istream& is) {
  std::vector<json> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(json::parse(line));
  }
  return out;
}

}  // namespace stepspec::engine

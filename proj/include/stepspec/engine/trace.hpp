// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "stepspec/core/serialize.hpp"
#include "stepspec/engine/engine.hpp"

namespace stepspec::engine {

// One JSONL record per StepOutcome ("kind": "step"), then a closing
// "kind": "trajectory" record with the answer phase and totals. `tag` is
// copied into every record (trajectory id, scheme, cell...).
std::vector<json> trace_records(const TrajectoryResult& result,
                                const json& tag = json::object());

void write_trace(std::ostream& os, const TrajectoryResult& result,
                 const json& tag = json::object());

// Summary recomputed from records alone.
struct TraceSummary {
  Tokens thinking_tokens = 0;
  Tokens budget = 0;
  Seconds latency_s = 0;
  std::size_t steps = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t forced = 0;
};

TraceSummary summarize_trace(const std::vector<json>& records);

// Empty when the records describe a valid trajectory: indices in order,
// scores in 0..9 where present, thinking tokens within the budget, and
// latency totals that re-add.
std::vector<std::string> validate_trace(const std::vector<json>& records);

std::vector<json> read_jsonl(std::istream& is);

}  // namespace stepspec::engine

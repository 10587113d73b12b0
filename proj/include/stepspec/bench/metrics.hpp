// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "stepspec/core/types.hpp"
#include "stepspec/engine/engine.hpp"

namespace stepspec::bench {

enum class Scheme { BaseOnly, SmallOnly, SpecDecode, SpecReason, SpecReasonDecode };

std::string_view to_string(Scheme s);
Scheme parse_scheme(std::string_view s);

// True for the schemes that propose whole steps with the small model.
bool speculates_steps(Scheme s);

struct RunMetrics {
  std::string problem_id;
  int repeat = 0;
  Scheme scheme = Scheme::BaseOnly;
  Seconds latency_s = 0;
  Tokens thinking_tokens = 0;
  Tokens token_budget = 0;
  std::optional<double> accepted_fraction;  // step-speculating schemes only
  std::size_t rejected_count = 0;
  std::size_t forced_steps = 0;
  std::size_t score_parse_failures = 0;
  bool correct = false;
  bool budget_exhausted = false;
};

RunMetrics make_metrics(const engine::TrajectoryResult& result, Scheme scheme,
                        std::string problem_id, int repeat, bool correct);

class MissingSamples : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MismatchedRunSets : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mean over problems of the fraction of correct samples. Every problem must
// have exactly k samples.
double pass_at_1(const std::vector<RunMetrics>& runs, int k);

// Baseline mean latency over scheme mean latency. Both sides must cover the
// same (problem, repeat) pairs.
double speedup(const std::vector<RunMetrics>& scheme,
               const std::vector<RunMetrics>& baseline);

double mean(const std::vector<double>& xs);
double median(std::vector<double> xs);

}  // namespace stepspec::bench

// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#include "stepspec/bench/metrics.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <utility>

namespace stepspec::bench {

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::BaseOnly: return "BaseOnly";
    case Scheme::SmallOnly: return "SmallOnly";
    case Scheme::SpecDecode: return "SpecDecode";
    case Scheme::SpecReason: return "SpecReason";
    case Scheme::SpecReasonDecode: return "SpecReasonDecode";
  }
  return "BaseOnly";
}

Scheme parse_scheme(std::string_view s) {
  for (auto c : {Scheme::BaseOnly, Scheme::SmallOnly, Scheme::SpecDecode,
                 Scheme::SpecReason, Scheme::SpecReasonDecode}) {
    if (to_string(c) == s) return c;
  }
  throw std::invalid_argument("unknown scheme: " + std::string(s));
}

bool speculates_steps(Scheme s) {
  return s == Scheme::SpecReason || s == Scheme::SpecReasonDecode;
}

RunMetrics make_metrics(const engine::TrajectoryResult& result, Scheme scheme,
                        std::string problem_id, int repeat, bool correct) {
  const auto& t = result.totals;
  RunMetrics m;
  m.problem_id = std::move(problem_id);
  m.repeat = repeat;
  m.scheme = scheme;
  m.latency_s = t.latency_s;
  m.thinking_tokens = t.thinking_tokens;
  m.token_budget = result.state.budget();
  if (speculates_steps(scheme)) m.accepted_fraction = t.accepted_fraction;
  m.rejected_count = t.rejected_count;
  m.forced_steps = t.forced_steps;
  m.score_parse_failures = t.score_parse_failures;
  m.correct = correct;
  m.budget_exhausted = t.budget_exhausted;
  return m;
}

double pass_at_1(const std::vector<RunMetrics>& runs, int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  std::map<std::string, std::pair<int, int>> by_problem;  // samples, correct
  for (const auto& r : runs) {
    auto& [n, c] = by_problem[r.problem_id];
    ++n;
    c += r.correct ? 1 : 0;
  }
  if (by_problem.empty()) throw MissingSamples("no samples");
  double sum = 0;
  for (const auto& [id, nc] : by_problem) {
    if (nc.first != k) {
      throw MissingSamples("problem " + id + " has " + std::to_string(nc.first) +
                           " samples, expected " + std::to_string(k));
    }
    sum += static_cast<double>(nc.second) / k;
  }
  return sum / static_cast<double>(by_problem.size());
}

double speedup(const std::vector<RunMetrics>& scheme,
               const std::vector<RunMetrics>& baseline) {
  auto keys = [](const std::vector<RunMetrics>& rs) {
    std::vector<std::pair<std::string, int>> k;
    for (const auto& r : rs) k.emplace_back(r.problem_id, r.repeat);
    std::sort(k.begin(), k.end());
    return k;
  };
  if (scheme.empty() || keys(scheme) != keys(baseline)) {
    throw MismatchedRunSets("scheme and baseline cover different runs");
  }
  auto mean_latency = [](const std::vector<RunMetrics>& rs) {
    double s = 0;
    for (const auto& r : rs) s += r.latency_s;
    return s / static_cast<double>(rs.size());
  };
  double denom = mean_latency(scheme);
  if (denom <= 0) throw std::domain_error("scheme mean latency is zero");
  return mean_latency(baseline) / denom;
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("mean of an empty set");
  return std::accumulate(xs.begin(), xs.end(), 0.0) /
         static_cast<double>(xs.size());
}

double median(std::vector<double> xs) {
  if (xs.empty()) throw std::invalid_argument("median of an empty set");
  std::sort(xs.begin(), xs.end());
  const auto n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace stepspec::bench

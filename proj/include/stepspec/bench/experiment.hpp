// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stepspec/backends/backend.hpp"
#include "stepspec/backends/http_backend.hpp"
#include "stepspec/bench/metrics.hpp"
#include "stepspec/core/serialize.hpp"
#include "stepspec/simlab/sim_model.hpp"

namespace stepspec::bench {

struct Problem {
  std::string id;
  std::string text;
  std::string answer;  // compared against the \boxed{} content
};

// `count` chain tasks of `steps` updates each, ids "chain-0000", ...
std::vector<Problem> generate_chain_suite(std::size_t count, std::size_t steps,
                                          std::uint64_t seed);

bool is_correct(const Problem& problem, const std::optional<std::string>& answer);

enum class Knob { Threshold, ForceFirstN, TokenBudget, DraftLength };

std::string_view to_string(Knob k);
Knob parse_knob(std::string_view s);

// Copy of `config` with the knob set to `value`.
EngineConfig apply_knob(EngineConfig config, Knob knob, std::int64_t value);
std::int64_t knob_value(const EngineConfig& config, Knob knob);

struct SweepSpec {
  Knob knob = Knob::Threshold;
  std::vector<std::int64_t> values;
  int repeats = 16;
  EngineConfig base_config;

  void validate() const;
};

struct BackendSpec {
  enum class Kind { Sim, Http } kind = Kind::Sim;
  simlab::SimModelSpec sim;
  std::optional<simlab::SimJudgeSpec> judge;  // base role only
  std::optional<std::uint64_t> sim_seed;      // defaults to the experiment seed
  HttpBackendOptions http;
};

struct ExperimentSpec {
  EngineConfig engine;
  BackendSpec small;
  BackendSpec base;
  std::vector<Problem> problems;
  std::vector<Scheme> schemes = {Scheme::SpecReason};
  std::optional<SweepSpec> sweep;  // engine config is the base config
  int repeats = 16;                // used when there is no sweep
  std::uint64_t seed = 0;
  int parallelism = 1;

  // The sweep to run; a single-cell sweep on the current knob setting when
  // none is configured.
  SweepSpec effective_sweep() const;
};

// `base_dir` resolves relative problem file paths. Throws SchemaError.
ExperimentSpec experiment_from_json(const json& j, const std::string& base_dir);

struct BackendPair {
  std::unique_ptr<Backend> small;
  std::unique_ptr<Backend> base;
};

BackendPair make_backends(const ExperimentSpec& spec);

// Seed of repeat j on problem q. Never depends on the knob value, so cells
// of a sweep are paired.
std::uint64_t trial_seed(std::uint64_t root, int repeat, std::size_t problem);

engine::TrajectoryResult run_scheme(Scheme scheme, const EngineConfig& config,
                                    const std::string& problem,
                                    const Backend& small, const Backend& base);

struct RunRecord {
  Scheme scheme = Scheme::BaseOnly;
  std::int64_t value = 0;
  int repeat = 0;
  std::size_t problem = 0;
  std::optional<RunMetrics> metrics;  // unset when the run failed
  std::string error;
  std::string trace_jsonl;  // kept when requested
};

struct CellResult {
  Scheme scheme = Scheme::BaseOnly;
  Knob knob = Knob::Threshold;
  std::int64_t value = 0;
  EngineConfig config;
  int repeats = 0;
  std::size_t problems = 0;
  std::size_t runs = 0;
  std::size_t failures = 0;
  std::optional<double> pass_at_1;  // unset when samples are missing
  double mean_latency_s = 0;
  double median_latency_s = 0;
  std::optional<double> mean_accepted_fraction;
  double mean_thinking_tokens = 0;
  double median_thinking_tokens = 0;
  double budget_exhausted_fraction = 0;
  double mean_forced_steps = 0;
};

struct SweepOutput {
  std::vector<CellResult> cells;
  std::vector<RunRecord> runs;  // scheme-major, then value, repeat, problem
};

struct SweepOptions {
  int parallelism = 1;
  bool keep_traces = false;
};

SweepOutput run_sweep(const ExperimentSpec& spec, const BackendPair& backends,
                      const SweepOptions& options);

// Per-cell aggregates; a pure fold over run records, shared with the
// recomputation from traces.
std::vector<CellResult> aggregate_cells(const ExperimentSpec& spec,
                                        const std::vector<RunRecord>& runs);

}  // namespace stepspec::bench

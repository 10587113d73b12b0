// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#include "stepspec/bench/experiment.hpp"

#include <spdlog/spdlog.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "stepspec/backends/sim_backend.hpp"
#include "stepspec/core/rng.hpp"
#include "stepspec/engine/trace.hpp"
#include "stepspec/simlab/chain_task.hpp"

namespace stepspec::bench {
namespace {

std::string chain_id(std::size_t i) {
  std::string n = std::to_string(i);
  return "chain-" + std::string(n.size() < 4 ? 4 - n.size() : 0, '0') + n;
}

Problem problem_from_task(const simlab::ChainTask& task, std::size_t i) {
  return {chain_id(i), simlab::render_problem(task),
          std::to_string(simlab::final_answer(task))};
}

std::vector<Problem> problems_from_json(const json& j, const std::string& path,
                                        const std::string& base_dir,
                                        std::uint64_t default_seed) {
  if (j.is_array()) {
    std::vector<Problem> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
      const std::string at = path + "[" + std::to_string(i) + "]";
      Problem p;
      ObjectReader r(j[i], at);
      r.required("problem", p.text);
      r.required("answer", p.answer);
      p.id = "item-" + std::to_string(i);
      r.optional("id", p.id);
      r.finish();
      out.push_back(std::move(p));
    }
    if (out.empty()) throw SchemaError(path, "no problems");
    return out;
  }
  ObjectReader r(j, path);
  int forms = r.has("generate") + r.has("tasks") + r.has("items") + r.has("file");
  if (forms != 1) {
    throw SchemaError(path, "expected exactly one of generate, tasks, items, file");
  }
  std::vector<Problem> out;
  if (r.has("generate")) {
    ObjectReader g(r.raw("generate"), r.child("generate"));
    std::size_t count = 20, steps = 12;
    std::uint64_t seed = default_seed;
    g.optional("count", count);
    g.optional("steps", steps);
    g.optional("seed", seed);
    g.finish();
    if (count < 1) throw SchemaError(g.child("count"), "must be >= 1");
    if (steps < 1) throw SchemaError(g.child("steps"), "must be >= 1");
    out = generate_chain_suite(count, steps, seed);
  } else if (r.has("tasks")) {
    const auto& tasks = r.raw("tasks");
    if (!tasks.is_array() || tasks.empty()) {
      throw SchemaError(r.child("tasks"), "expected a non-empty list");
    }
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      try {
        auto task = tasks[i].get<simlab::ChainTask>();
        out.push_back(problem_from_task(task, i));
      } catch (const SchemaError&) {
        throw;
      } catch (const std::exception& e) {
        throw SchemaError(r.child("tasks") + "[" + std::to_string(i) + "]",
                          e.what());
      }
    }
  } else if (r.has("items")) {
    out = problems_from_json(r.raw("items"), r.child("items"), base_dir,
                             default_seed);
  } else {
    std::string file;
    r.optional("file", file);
    std::filesystem::path p(file);
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    std::ifstream in(p);
    if (!in) throw SchemaError(r.child("file"), "cannot open " + p.string());
    json inner;
    try {
      inner = json::parse(in);
    } catch (const json::parse_error& e) {
      throw SchemaError(r.child("file"), p.string() + ": " + e.what());
    }
    out = problems_from_json(inner, p.string(), p.parent_path().string(),
                             default_seed);
  }
  r.finish();
  return out;
}

BackendSpec backend_from_json(const json& j, const std::string& path,
                              BackendRole role) {
  BackendSpec b;
  b.sim = role == BackendRole::Small ? simlab::default_small_model()
                                     : simlab::default_base_model();
  if (role == BackendRole::Base) b.judge = simlab::SimJudgeSpec{};
  ObjectReader r(j, path);
  std::string kind = "sim";
  r.optional("kind", kind);
  if (kind == "sim") {
    b.kind = BackendSpec::Kind::Sim;
    if (r.has("model")) {
      b.sim = simlab::sim_model_from_json(r.raw("model"), r.child("model"), b.sim);
    }
    if (r.has("judge")) {
      if (role != BackendRole::Base) {
        throw SchemaError(r.child("judge"), "only the base backend judges steps");
      }
      b.judge = simlab::sim_judge_from_json(r.raw("judge"), r.child("judge"));
    }
    std::uint64_t seed = 0;
    if (r.has("seed")) {
      r.optional("seed", seed);
      b.sim_seed = seed;
    }
    if (b.sim.profile.role != role) {
      throw SchemaError(r.child("model.profile.role"),
                        "must be " + std::string(to_string(role)));
    }
  } else if (kind == "http") {
    b.kind = BackendSpec::Kind::Http;
    auto& h = b.http;
    h.profile = b.sim.profile;
    r.required("base_url", h.base_url);
    r.optional("model", h.model);
    r.optional("api_key_env", h.api_key_env);
    r.optional("timeout_s", h.timeout_s);
    r.optional("max_attempts", h.max_attempts);
    r.optional("initial_backoff_s", h.initial_backoff_s);
    r.optional("send_seed", h.send_seed);
    if (r.has("extra_body")) {
      h.extra_body = r.raw("extra_body");
      if (!h.extra_body.is_object()) {
        throw SchemaError(r.child("extra_body"), "expected an object");
      }
    }
    if (r.has("profile")) {
      json merged = h.profile;
      for (const auto& [k, v] : r.raw("profile").items()) merged[k] = v;
      h.profile = backend_profile_from_json(merged, r.child("profile"));
    }
    if (h.profile.role != role) {
      throw SchemaError(r.child("profile.role"),
                        "must be " + std::string(to_string(role)));
    }
    if (h.max_attempts < 1) {
      throw SchemaError(r.child("max_attempts"), "must be >= 1");
    }
    if (h.base_url.rfind("https://", 0) == 0) {
      throw SchemaError(r.child("base_url"), "https endpoints are not supported");
    }
  } else {
    throw SchemaError(r.child("kind"), "expected \"sim\" or \"http\"");
  }
  r.finish();
  return b;
}

std::unique_ptr<Backend> build_backend(const BackendSpec& b,
                                       std::uint64_t default_seed) {
  if (b.kind == BackendSpec::Kind::Http) {
    return std::make_unique<HttpBackend>(b.http);
  }
  return std::make_unique<SimBackend>(b.sim, b.judge,
                                      b.sim_seed.value_or(default_seed));
}

}  // namespace

std::vector<Problem> generate_chain_suite(std::size_t count, std::size_t steps,
                                          std::uint64_t seed) {
  std::vector<Problem> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(problem_from_task(
        simlab::make_chain_task(derive_seed(seed, {0x7A5C, i}), steps), i));
  }
  return out;
}

bool is_correct(const Problem& problem,
                const std::optional<std::string>& answer) {
  if (!answer) return false;
  auto boxed = simlab::extract_boxed(*answer);
  return boxed && *boxed == problem.answer;
}

std::string_view to_string(Knob k) {
  switch (k) {
    case Knob::Threshold: return "Threshold";
    case Knob::ForceFirstN: return "ForceFirstN";
    case Knob::TokenBudget: return "TokenBudget";
    case Knob::DraftLength: return "DraftLength";
  }
  return "Threshold";
}

Knob parse_knob(std::string_view s) {
  for (auto k : {Knob::Threshold, Knob::ForceFirstN, Knob::TokenBudget,
                 Knob::DraftLength}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown knob: " + std::string(s));
}

EngineConfig apply_knob(EngineConfig config, Knob knob, std::int64_t value) {
  switch (knob) {
    case Knob::Threshold:
      config.threshold = AcceptanceThreshold(static_cast<int>(value));
      break;
    case Knob::ForceFirstN: config.force_first_n = static_cast<int>(value); break;
    case Knob::TokenBudget: config.token_budget = value; break;
    case Knob::DraftLength: config.draft_length = static_cast<int>(value); break;
  }
  config.validate();
  return config;
}

std::int64_t knob_value(const EngineConfig& config, Knob knob) {
  switch (knob) {
    case Knob::Threshold: return config.threshold.value();
    case Knob::ForceFirstN: return config.force_first_n;
    case Knob::TokenBudget: return config.token_budget;
    case Knob::DraftLength: return config.draft_length;
  }
  return 0;
}

void SweepSpec::validate() const {
  if (values.empty()) throw std::invalid_argument("sweep values are empty");
  if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
  for (auto v : values) (void)apply_knob(base_config, knob, v);
}

SweepSpec ExperimentSpec::effective_sweep() const {
  if (sweep) return *sweep;
  SweepSpec s;
  s.knob = Knob::Threshold;
  s.values = {engine.threshold.value()};
  s.repeats = repeats;
  s.base_config = engine;
  return s;
}

ExperimentSpec experiment_from_json(const json& j, const std::string& base_dir) {
  ExperimentSpec spec;
  ObjectReader r(j, "");
  r.optional("seed", spec.seed);
  r.optional("repeats", spec.repeats);
  r.optional("parallelism", spec.parallelism);
  if (spec.repeats < 1) throw SchemaError("repeats", "must be >= 1");
  if (spec.parallelism < 1) throw SchemaError("parallelism", "must be >= 1");
  if (r.has("engine")) spec.engine = engine_config_from_json(r.raw("engine"), "engine");

  json backends = json::object();
  if (r.has("backends")) backends = r.raw("backends");
  {
    ObjectReader b(backends, "backends");
    spec.small = backend_from_json(b.has("small") ? b.raw("small") : json::object(),
                                   "backends.small", BackendRole::Small);
    spec.base = backend_from_json(b.has("base") ? b.raw("base") : json::object(),
                                  "backends.base", BackendRole::Base);
    b.finish();
  }

  if (r.has("schemes")) {
    const auto& s = r.raw("schemes");
    if (!s.is_array() || s.empty()) {
      throw SchemaError("schemes", "expected a non-empty list");
    }
    spec.schemes.clear();
    for (std::size_t i = 0; i < s.size(); ++i) {
      try {
        spec.schemes.push_back(parse_scheme(s[i].get<std::string>()));
      } catch (const std::exception& e) {
        throw SchemaError("schemes[" + std::to_string(i) + "]", e.what());
      }
    }
  }

  if (r.has("sweep")) {
    ObjectReader s(r.raw("sweep"), "sweep");
    SweepSpec sw;
    std::string knob;
    s.required("knob", knob);
    try {
      sw.knob = parse_knob(knob);
    } catch (const std::invalid_argument& e) {
      throw SchemaError("sweep.knob", e.what());
    }
    s.required("values", sw.values);
    sw.repeats = spec.repeats;
    s.optional("repeats", sw.repeats);
    s.finish();
    sw.base_config = spec.engine;
    try {
      sw.validate();
    } catch (const std::invalid_argument& e) {
      throw SchemaError("sweep", e.what());
    }
    spec.sweep = std::move(sw);
  }

  if (r.has("problems")) {
    spec.problems = problems_from_json(r.raw("problems"), "problems", base_dir,
                                       spec.seed);
  } else {
    spec.problems = generate_chain_suite(20, 12, spec.seed);
  }
  r.finish();
  return spec;
}

BackendPair make_backends(const ExperimentSpec& spec) {
  return {build_backend(spec.small, spec.seed), build_backend(spec.base, spec.seed)};
}

std::uint64_t trial_seed(std::uint64_t root, int repeat, std::size_t problem) {
  return derive_seed(root, {static_cast<std::uint64_t>(repeat),
                            static_cast<std::uint64_t>(problem)});
}

engine::TrajectoryResult run_scheme(Scheme scheme, const EngineConfig& config,
                                    const std::string& problem,
                                    const Backend& small, const Backend& base) {
  switch (scheme) {
    case Scheme::BaseOnly:
      return engine::run_single_model(config, problem, base);
    case Scheme::SmallOnly:
      return engine::run_single_model(config, problem, small, nullptr,
                                      engine::CallPurpose::Draft);
    case Scheme::SpecDecode:
      return engine::run_single_model(config, problem, base, &small);
    case Scheme::SpecReason: {
      auto c = config;
      c.hierarchical = false;
      return engine::run_trajectory(c, problem, small, base);
    }
    case Scheme::SpecReasonDecode: {
      auto c = config;
      c.hierarchical = true;
      return engine::run_trajectory(c, problem, small, base);
    }
  }
  throw std::logic_error("unhandled scheme");
}

SweepOutput run_sweep(const ExperimentSpec& spec, const BackendPair& backends,
                      const SweepOptions& options) {
  const SweepSpec sweep = spec.effective_sweep();
  sweep.validate();

  SweepOutput out;
  for (auto scheme : spec.schemes) {
    for (auto value : sweep.values) {
      for (int j = 0; j < sweep.repeats; ++j) {
        for (std::size_t q = 0; q < spec.problems.size(); ++q) {
          out.runs.push_back({scheme, value, j, q, std::nullopt, {}, {}});
        }
      }
    }
  }

  auto run_one = [&](RunRecord& rec) {
    const auto& problem = spec.problems[rec.problem];
    auto config = apply_knob(sweep.base_config, sweep.knob, rec.value);
    config.seed = trial_seed(spec.seed, rec.repeat, rec.problem);
    try {
      auto result = run_scheme(rec.scheme, config, problem.text,
                               *backends.small, *backends.base);
      bool correct = is_correct(problem, result.state.final_answer());
      rec.metrics = make_metrics(result, rec.scheme, problem.id, rec.repeat, correct);
      if (options.keep_traces) {
        json tag = {{"scheme", to_string(rec.scheme)},
                    {"knob", to_string(sweep.knob)},
                    {"value", rec.value},
                    {"repeat", rec.repeat},
                    {"problem", problem.id},
                    {"correct", correct}};
        std::ostringstream os;
        engine::write_trace(os, result, tag);
        rec.trace_jsonl = os.str();
      }
    } catch (const std::exception& e) {
      rec.error = std::string(to_string(rec.scheme)) + " " +
                  std::string(to_string(sweep.knob)) + "=" +
                  std::to_string(rec.value) + " repeat " +
                  std::to_string(rec.repeat) + " problem " + problem.id + ": " +
                  e.what();
      spdlog::warn("run failed: {}", rec.error);
    }
  };

  const int workers = std::max(1, options.parallelism);
  if (workers == 1) {
    for (auto& rec : out.runs) run_one(rec);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (auto i = next++; i < out.runs.size(); i = next++) run_one(out.runs[i]);
      });
    }
    for (auto& t : pool) t.join();
  }

  out.cells = aggregate_cells(spec, out.runs);
  return out;
}

std::vector<CellResult> aggregate_cells(const ExperimentSpec& spec,
                                        const std::vector<RunRecord>& runs) {
  const SweepSpec sweep = spec.effective_sweep();
  std::vector<CellResult> cells;
  for (auto scheme : spec.schemes) {
    for (auto value : sweep.values) {
      CellResult c;
      c.scheme = scheme;
      c.knob = sweep.knob;
      c.value = value;
      c.config = apply_knob(sweep.base_config, sweep.knob, value);
      c.repeats = sweep.repeats;
      c.problems = spec.problems.size();

      std::vector<RunMetrics> ok;
      for (const auto& r : runs) {
        if (r.scheme != scheme || r.value != value) continue;
        ++c.runs;
        if (r.metrics) {
          ok.push_back(*r.metrics);
        } else {
          ++c.failures;
        }
      }
      if (!ok.empty()) {
        try {
          c.pass_at_1 = pass_at_1(ok, sweep.repeats);
        } catch (const MissingSamples&) {
        }
        std::vector<double> lat, tok, acc;
        double exhausted = 0, forced = 0;
        for (const auto& m : ok) {
          lat.push_back(m.latency_s);
          tok.push_back(static_cast<double>(m.thinking_tokens));
          if (m.accepted_fraction) acc.push_back(*m.accepted_fraction);
          exhausted += m.budget_exhausted ? 1 : 0;
          forced += static_cast<double>(m.forced_steps);
        }
        c.mean_latency_s = mean(lat);
        c.median_latency_s = median(lat);
        c.mean_thinking_tokens = mean(tok);
        c.median_thinking_tokens = median(tok);
        if (!acc.empty()) c.mean_accepted_fraction = mean(acc);
        c.budget_exhausted_fraction = exhausted / static_cast<double>(ok.size());
        c.mean_forced_steps = forced / static_cast<double>(ok.size());
      }
      cells.push_back(std::move(c));
    }
  }
  return cells;
}

}  // namespace stepspec::bench

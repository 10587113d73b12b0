// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "stepspec/bench/experiment.hpp"
#include "stepspec/bench/metrics.hpp"
#include "stepspec/bench/report.hpp"
#include "stepspec/core/rng.hpp"

using namespace stepspec;
using namespace stepspec::bench;

namespace {

RunMetrics run(const std::string& id, int repeat, bool correct, double latency = 1.0) {
  RunMetrics m;
  m.problem_id = id;
  m.repeat = repeat;
  m.correct = correct;
  m.latency_s = latency;
  return m;
}

// Plain double loop over a problems x samples correctness matrix.
double brute_pass_at_1(const std::vector<std::vector<bool>>& matrix) {
  double total = 0;
  for (const auto& row : matrix) {
    int hits = 0;
    for (bool c : row) hits += c ? 1 : 0;
    total += static_cast<double>(hits) / static_cast<double>(row.size());
  }
  return total / static_cast<double>(matrix.size());
}

ExperimentSpec small_spec(const json& extra = json::object()) {
  json j = {{"seed", 5},
            {"repeats", 2},
            {"problems", {{"generate", {{"count", 4}, {"steps", 6}, {"seed", 1}}}}}};
  j.merge_patch(extra);
  return experiment_from_json(j, ".");
}

}  // namespace

TEST_CASE("pass@1 examples") {
  std::vector<RunMetrics> all;
  for (int r = 0; r < 4; ++r) all.push_back(run("a", r, true));
  CHECK(pass_at_1(all, 4) == 1.0);

  std::vector<RunMetrics> half;
  for (int r = 0; r < 16; ++r) half.push_back(run("a", r, r % 2 == 0));
  CHECK(pass_at_1(half, 16) == 0.5);

  half.pop_back();
  CHECK_THROWS_AS(pass_at_1(half, 16), MissingSamples);
  CHECK_THROWS_AS(pass_at_1({}, 1), MissingSamples);
}

TEST_CASE("pass@1 equals a brute-force recount") {
  auto rng = make_rng(42);
  for (int c = 0; c < 1000; ++c) {
    std::size_t problems = 1 + rng() % 12;
    int k = 1 + static_cast<int>(rng() % 16);
    std::vector<std::vector<bool>> matrix(problems);
    std::vector<RunMetrics> runs;
    for (std::size_t p = 0; p < problems; ++p) {
      for (int r = 0; r < k; ++r) {
        bool ok = bernoulli(rng, uniform01(rng));
        matrix[p].push_back(ok);
        runs.push_back(run("p" + std::to_string(p), r, ok));
      }
    }
    std::shuffle(runs.begin(), runs.end(), rng);
    CHECK(pass_at_1(runs, k) == doctest::Approx(brute_pass_at_1(matrix)).epsilon(1e-12));
  }
}

TEST_CASE("speedup examples") {
  std::vector<RunMetrics> base{run("a", 0, true, 100.0)};
  std::vector<RunMetrics> fast{run("a", 0, true, 50.0)};
  CHECK(speedup(base, base) == 1.0);
  CHECK(speedup(fast, base) == 2.0);
  std::vector<RunMetrics> other{run("b", 0, true, 50.0)};
  CHECK_THROWS_AS(speedup(other, base), MismatchedRunSets);
  std::vector<RunMetrics> shifted{run("a", 1, true, 50.0)};
  CHECK_THROWS_AS(speedup(shifted, base), MismatchedRunSets);
}

TEST_CASE("mean and median") {
  CHECK(mean({1, 2, 6}) == 3.0);
  CHECK(median({5, 1, 3}) == 3.0);
  CHECK(median({4, 1, 3, 2}) == 2.5);
  CHECK_THROWS(mean({}));
}

TEST_CASE("scheme and knob names round trip") {
  for (auto s : {Scheme::BaseOnly, Scheme::SmallOnly, Scheme::SpecDecode, Scheme::SpecReason,
                 Scheme::SpecReasonDecode}) {
    CHECK(parse_scheme(to_string(s)) == s);
  }
  for (auto k : {Knob::Threshold, Knob::ForceFirstN, Knob::TokenBudget, Knob::DraftLength}) {
    CHECK(parse_knob(to_string(k)) == k);
    CHECK(knob_value(apply_knob(EngineConfig{}, k, 3), k) == 3);
  }
  CHECK(speculates_steps(Scheme::SpecReason));
  CHECK_FALSE(speculates_steps(Scheme::SpecDecode));
}

TEST_CASE("sweep specs reject empty values and zero repeats") {
  SweepSpec s;
  CHECK_THROWS(s.validate());
  s.values = {1};
  s.repeats = 0;
  CHECK_THROWS(s.validate());
  s.repeats = 1;
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("generated suites are deterministic and answerable") {
  auto a = generate_chain_suite(5, 8, 3);
  auto b = generate_chain_suite(5, 8, 3);
  REQUIRE(a.size() == 5);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].text == b[i].text);
    CHECK(is_correct(a[i], "\\boxed{" + a[i].answer + "}"));
    CHECK_FALSE(is_correct(a[i], std::nullopt));
  }
}

TEST_CASE("a single value with one repeat yields one row") {
  auto spec = small_spec({{"repeats", 1}});
  auto backends = make_backends(spec);
  auto out = run_sweep(spec, backends, {});
  REQUIRE(out.cells.size() == 1);
  CHECK(out.runs.size() == spec.problems.size());
  CHECK(out.cells[0].failures == 0);
  CHECK(out.cells[0].pass_at_1.has_value());
  std::ostringstream csv;
  write_results_csv(csv, out.cells);
  std::istringstream in(csv.str());
  auto rows = read_results_csv(in);
  CHECK(rows.size() == 1);
  CHECK(rows[0].at("schema_version") == std::to_string(kResultsSchemaVersion));
}

TEST_CASE("trial seeds ignore the knob value") {
  CHECK(trial_seed(1, 0, 0) != trial_seed(1, 0, 1));
  CHECK(trial_seed(1, 0, 0) != trial_seed(1, 1, 0));

  // Force-first-n never reaches past the task, so the base-only scheme sees
  // the same work under every value and must produce identical runs.
  auto spec = small_spec({{"schemes", {"BaseOnly"}},
                          {"sweep", {{"knob", "ForceFirstN"}, {"values", {0, 2, 4}}, {"repeats", 2}}}});
  auto backends = make_backends(spec);
  auto out = run_sweep(spec, backends, {});
  REQUIRE(out.cells.size() == 3);
  std::size_t per_cell = out.runs.size() / 3;
  for (std::size_t i = 0; i < per_cell; ++i) {
    const auto& a = *out.runs[i].metrics;
    for (std::size_t v = 1; v < 3; ++v) {
      const auto& b = *out.runs[v * per_cell + i].metrics;
      CHECK(a.latency_s == b.latency_s);
      CHECK(a.thinking_tokens == b.thinking_tokens);
      CHECK(a.correct == b.correct);
    }
  }
}

TEST_CASE("parallel and serial sweeps agree") {
  auto spec = small_spec({{"schemes", {"SpecReason", "BaseOnly"}}});
  auto backends = make_backends(spec);
  auto serial = run_sweep(spec, backends, {1, false});
  auto parallel = run_sweep(spec, backends, {4, false});
  REQUIRE(serial.runs.size() == parallel.runs.size());
  for (std::size_t i = 0; i < serial.runs.size(); ++i) {
    CHECK(serial.runs[i].metrics->latency_s == parallel.runs[i].metrics->latency_s);
    CHECK(serial.runs[i].problem == parallel.runs[i].problem);
  }
}

TEST_CASE("table cells recompute from the written traces") {
  auto spec = small_spec({{"schemes", {"SpecReason", "BaseOnly", "SpecReasonDecode"}},
                          {"sweep", {{"knob", "Threshold"}, {"values", {3, 7}}, {"repeats", 2}}}});
  auto backends = make_backends(spec);
  auto out = run_sweep(spec, backends, {2, true});
  auto dir = std::filesystem::temp_directory_path() / "stepspec_bench_test";
  std::filesystem::remove_all(dir);
  write_outputs(dir, spec, out);
  CHECK(std::filesystem::exists(dir / "results.csv"));
  CHECK(std::filesystem::exists(dir / "summary.json"));
  CHECK(std::filesystem::exists(dir / "plots" / "latency_accuracy.svg"));
  CHECK(std::filesystem::exists(dir / "plots" / "latency_accuracy.dat"));
  CHECK(std::filesystem::exists(dir / "traces" / trace_file_name(Scheme::SpecReason, Knob::Threshold, 3)));

  auto again = recompute_cells_from_traces(dir, spec);
  REQUIRE(again.size() == out.cells.size());
  for (std::size_t i = 0; i < again.size(); ++i) {
    const auto& a = out.cells[i];
    const auto& b = again[i];
    CHECK(a.scheme == b.scheme);
    CHECK(a.value == b.value);
    CHECK(a.pass_at_1 == b.pass_at_1);
    CHECK(a.mean_latency_s == doctest::Approx(b.mean_latency_s).epsilon(1e-9));
    CHECK(a.median_latency_s == doctest::Approx(b.median_latency_s).epsilon(1e-9));
    CHECK(a.mean_thinking_tokens == b.mean_thinking_tokens);
    CHECK(a.mean_accepted_fraction.has_value() == b.mean_accepted_fraction.has_value());
    if (a.mean_accepted_fraction) {
      CHECK(*a.mean_accepted_fraction == doctest::Approx(*b.mean_accepted_fraction));
    }
    CHECK(a.budget_exhausted_fraction == b.budget_exhausted_fraction);
  }

  std::ifstream f1(dir / "results.csv"), f2(dir / "results.csv");
  auto report = compare_results(f1, f2);
  CHECK(report.find("SpecReason Threshold=3") != std::string::npos);
  CHECK(report.find("+0.0000") != std::string::npos);
  CHECK(report.find("only in") == std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("forced step counts follow min(n, steps)") {
  auto spec = small_spec({{"schemes", {"SpecReason"}},
                          {"sweep", {{"knob", "ForceFirstN"}, {"values", {0, 3, 10}}, {"repeats", 1}}}});
  auto backends = make_backends(spec);
  auto out = run_sweep(spec, backends, {});
  for (const auto& r : out.runs) {
    REQUIRE(r.metrics.has_value());
    CHECK(r.metrics->forced_steps <= static_cast<std::size_t>(r.value));
  }
  CHECK(out.cells[0].mean_forced_steps == 0.0);
  CHECK(out.cells[1].mean_forced_steps == 3.0);
}

TEST_CASE("config parsing rejects bad input") {
  CHECK_THROWS_AS(experiment_from_json({{"schemes", {"Nope"}}}, "."), std::exception);
  CHECK_THROWS_AS(experiment_from_json({{"repeats", 0}}, "."), std::exception);
  CHECK_THROWS_AS(
      experiment_from_json({{"backends", {{"base", {{"kind", "http"}, {"base_url", "https://x"}}}}}}, "."),
      std::exception);
}

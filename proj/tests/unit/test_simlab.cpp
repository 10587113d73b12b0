// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "stepspec/core/text.hpp"
#include "stepspec//simlab/chain_task.hpp"
#include "stepspec/simlab/latency_model.hpp"
#include "stepspec/simlab/sim_model.hpp"

using namespace stepspec;
using namespace stepspec::simlab;

namespace {

ChainTask task_of(std::int64_t m, std::int64_t s0,
                  std::vector<ChainTask::Update> u) {
  ChainTask t;
  t.modulus = m;
  t.start = s0;
  t.updates = std::move(u);
  return t;
}

// Independent recurrence: fold the updates with plain arithmetic.
std::int64_t brute_force_state(const ChainTask& t, std::size_t i) {
  long long x = t.start;
  for (std::size_t k = 0; k < i; ++k) {
    x = (t.updates[k].a * x + t.updates[k].b) % t.modulus;
  }
  return x;
}

}  // namespace

TEST_CASE("ground truth worked examples") {
  auto ident = task_of(97, 5, std::vector<ChainTask::Update>(6, {1, 0}));
  for (std::size_t i = 0; i <= 6; ++i) CHECK(ground_truth(ident, i) == 5);

  auto t = task_of(10, 3, std::vector<ChainTask::Update>(3, {2, 1}));
  CHECK(ground_truth(t, 0) == 3);
  CHECK(ground_truth(t, 1) == 7);
  CHECK(ground_truth(t, 2) == 5);
  CHECK(ground_truth(t, 3) == 1);
  CHECK(final_answer(t) == 1);
}

TEST_CASE("ground truth equals an independent recurrence") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    auto t = make_chain_task(seed, 1 + seed % 40);
    for (std::size_t i = 0; i <= t.length(); ++i) {
      CHECK(ground_truth(t, i) == brute_force_state(t, i));
    }
  }
}

TEST_CASE("problem text round trips through the parser") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto t = make_chain_task(seed, 1 + seed % 20);
    auto text = render_problem(t);
    auto back = parse_problem("preamble\n" + text + "\n<think>\nStep 1: x = 3.\n");
    REQUIRE(back);
    CHECK(*back == t);
  }
  CHECK_FALSE(parse_problem("no task here"));
  json j = make_chain_task(4, 5);
  CHECK(j.get<ChainTask>() == make_chain_task(4, 5));
  CHECK_THROWS_AS((json{{"m", 97}, {"s0", 200}, {"coefficients", {{1, 2}}}}.get<ChainTask>()),
                  SchemaError);
}

TEST_CASE("step simulation extremes") {
  auto t = make_chain_task(9, 20);
  SimModelSpec perfect = default_base_model();
  perfect.per_step_error_prob = 0;
  SimModelSpec broken = default_small_model();
  broken.per_step_error_prob = 1;
  broken.reflection_prob = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto rng = make_rng(seed);
    std::int64_t good = t.start, bad = t.start;
    for (std::size_t i = 0; i < t.length(); ++i) {
      auto a = simulate_step_text(perfect, t, i, good, rng);
      CHECK(a.correct);
      CHECK(step_is_valid(t, i, good, a.claimed));
      good = a.claimed;
      auto b = simulate_step_text(broken, t, i, bad, rng);
      CHECK_FALSE(b.correct);
      CHECK_FALSE(step_is_valid(t, i, bad, b.claimed));
      CHECK(read_claim(b.text) == b.claimed);
      bad = b.claimed;
    }
    CHECK(good == final_answer(t));
  }
}

TEST_CASE("per-step error rate matches the configured probability") {
  SimModelSpec spec = default_small_model();
  spec.per_step_error_prob = 0.3;
  spec.reflection_prob = 0;
  std::size_t wrong = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    auto t = make_chain_task(seed, 20);
    auto rng = make_rng(derive_seed(seed, {1}));
    std::int64_t prior = t.start;
    for (std::size_t i = 0; i < t.length(); ++i) {
      auto s = simulate_step_text(spec, t, i, prior, rng);
      wrong += s.correct ? 0 : 1;
      ++total;
      prior = s.claimed;
    }
  }
  double rate = static_cast<double>(wrong) / static_cast<double>(total);
  CHECK(std::abs(rate - 0.3) <= 0.01);
}

TEST_CASE("mean step length is fixed tokens plus verbosity") {
  auto t = make_chain_task(1, 1);
  for (auto spec : {default_small_model(), default_base_model()}) {
    double sum = 0;
    const int n = 20000;
    auto rng = make_rng(5);
    for (int k = 0; k < n; ++k) {
      sum += static_cast<double>(count_tokens(simulate_step_text(spec, t, 0, t.start, rng).text));
    }
    CHECK(std::abs(sum / n - (kStepFixedTokens + spec.verbosity)) < 0.1);
  }
}

TEST_CASE("judge scores") {
  SimJudgeSpec judge;
  auto rng = make_rng(1);
  for (int k = 0; k < 1000; ++k) CHECK(simulate_judge_score(judge, true, rng).value() == 9);
  judge.noise = 0;
  for (int k = 0; k < 1000; ++k) CHECK(simulate_judge_score(judge, false, rng).value() <= 3);
  judge.noise = 0.1;
  int nines = 0;
  const int n = 10000;
  for (int k = 0; k < n; ++k) nines += simulate_judge_score(judge, false, rng).value() == 9;
  CHECK(std::abs(nines / static_cast<double>(n) - 0.1) <= 0.01);

  SimJudgeSpec bad;
  bad.wrong_score_max = 9;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("cot reading and answers") {
  auto t = task_of(10, 3, std::vector<ChainTask::Update>(3, {2, 1}));
  auto view = read_cot("Step 1: so x = 7.\nStep 2: x = 5.\n");
  CHECK(view.steps_done == 2);
  CHECK(view.last_claim == 5);
  SimModelSpec exact = default_base_model();
  exact.answer_error_prob = 0;
  auto rng = make_rng(2);
  CHECK(simulate_answer(exact, t, view, rng) == "Final answer: \\boxed{1}");
  CHECK(extract_boxed("Final answer: \\boxed{ 42 }") == "42");
  CHECK_FALSE(extract_boxed("no box"));
}

TEST_CASE("step latency arithmetic") {
  BackendProfile base{"base", BackendRole::Base, 0.05, 2000};
  CHECK(step_latency(base, 1, 70) == doctest::Approx(0.085));
  CHECK(step_latency(base, 1, 70) / base.decode_s_per_token == doctest::Approx(1.7));
  CHECK(step_latency(base, 0, 0) == 0.0);
  CHECK_THROWS_AS(step_latency(base, -1, 0), std::invalid_argument);
  std::mt19937_64 rng(4);
  for (int k = 0; k < 1000; ++k) {
    BackendProfile p{"p", BackendRole::Small, 1e-4 * (1 + rng() % 1000), 1.0 + rng() % 50000};
    Tokens d = rng() % 500, f = rng() % 5000;
    double want = static_cast<double>(d) * p.decode_s_per_token +
                  static_cast<double>(f) / p.prefill_tokens_per_s;
    CHECK(step_latency(p, d, f) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("closed-form step latency") {
  StepCostModel model;
  auto one = expected_step_latency(1.0, model);
  CHECK(one.total == doctest::Approx(one.speculate + one.verify));
  auto zero = expected_step_latency(0.0, model);
  CHECK(zero.total == doctest::Approx(zero.speculate + zero.verify + zero.regenerate));
  CHECK(expected_base_only_step_latency(model) / zero.total < 1.0);
  CHECK_THROWS_AS(expected_step_latency(1.5, model), std::invalid_argument);
}

TEST_CASE("Monte-Carlo step latency agrees with the closed form") {
  StepCostModel model;
  for (double alpha : {0.38, 0.80}) {
    auto mc = monte_carlo_step_latency(alpha, model, 100000, 17);
    auto cf = expected_step_latency(alpha, model);
    CHECK(std::abs(mc.mean - cf.total) / cf.total < 0.01);
    CHECK(std::abs(mc.accept_rate - alpha) < 0.01);
  }
}

TEST_CASE("simulated model specs merge partial JSON") {
  auto s = sim_model_from_json(json{{"verbosity", 6.0}, {"profile", {{"decode_s_per_token", 0.01}}}},
                               "backends.small.model", default_small_model());
  CHECK(s.verbosity == 6.0);
  CHECK(s.profile.decode_s_per_token == 0.01);
  CHECK(s.profile.role == BackendRole::Small);
  CHECK_THROWS_AS(sim_model_from_json(json{{"verbose", 1}}, "m", default_small_model()), SchemaError);
  CHECK_THROWS_AS(sim_model_from_json(json{{"per_step_error_prob", 2}}, "m", default_small_model()),
                  SchemaError);
}

// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "stepspec/backends/prompt.hpp"
#include "stepspec/backends/sim_backend.hpp"
#include "stepspec/core/rng.hpp"
#include "stepspec/simlab/chain_task.hpp"
#include "stepspec/specdecode/specdecode.hpp"
#include "stepspec/specdecode/synthetic.hpp"

using namespace stepspec;
using namespace stepspec::specdecode;

namespace {

// Proposes the one token the target would never choose at the first draft
// position of every round.
class Contrarian final : public TokenModel {
 public:
  explicit Contrarian(const TokenModel& target) : target_(target) {}
  Token next_token(std::span<const Token> prefix,
                   std::span<const Token> generated) const override {
    auto want = target_.next_token(prefix, generated);
    return want == SyntheticLm::piece(0) ? SyntheticLm::piece(1) : SyntheticLm::piece(0);
  }

 private:
  const TokenModel& target_;
};

std::vector<Token> random_prefix(std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::vector<Token> p;
  auto n = rng() % 12;
  for (std::size_t i = 0; i < n; ++i) p.push_back(SyntheticLm::piece(static_cast<int>(rng() % 64)));
  return p;
}

}  // namespace

TEST_CASE("identical draft accepts every proposal") {
  SyntheticLm lm(3);
  for (int gamma = 1; gamma <= 8; ++gamma) {
    for (std::size_t len : {1u, 5u, 17u, 40u}) {
      StopRule stop{len, nullptr};
      auto out = speculative_decode(lm, lm, {}, gamma, stop);
      CHECK(out.tokens.size() == len);
      // Rounds add gamma + 1 tokens until the cap leaves less room.
      std::size_t expect = 0, made = 0;
      while (made < len) {
        std::size_t room = std::min<std::size_t>(gamma, len - made);
        made += room + (made + room < len ? 1 : 0);
        ++expect;
      }
      CHECK(out.rounds.size() == expect);
      for (const auto& r : out.rounds) CHECK(r.accepted_prefix_len == r.drafted.size());
    }
  }
}

TEST_CASE("round count with a stop rule is ceil(L / (gamma + 1))") {
  SyntheticLm lm(8);
  for (int gamma = 1; gamma <= 8; ++gamma) {
    for (std::size_t len : {1u, 6u, 12u, 31u}) {
      StopRule stop{1000, [len](std::span<const Token> g) { return g.size() >= len; }};
      auto out = speculative_decode(lm, lm, {}, gamma, stop);
      CHECK(out.tokens.size() == len);
      CHECK(out.rounds.size() == (len + gamma) / (gamma + 1));
    }
  }
}

TEST_CASE("a draft that always disagrees degenerates to target decoding") {
  SyntheticLm target(5);
  Contrarian draft(target);
  StopRule stop{50, nullptr};
  auto out = speculative_decode(draft, target, {}, 4, stop);
  CHECK(out.tokens == greedy_decode(target, {}, stop).tokens);
  CHECK(out.rounds.size() == 50);
  for (const auto& r : out.rounds) {
    CHECK(r.accepted_prefix_len == 0);
    CHECK(r.bonus_token.has_value());
    CHECK(r.appended() == 1);
  }
}

TEST_CASE("speculative decoding is lossless on random cases") {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    SyntheticLm target(seed);
    auto rng = make_rng(derive_seed(seed, {1}));
    double agreement = uniform01(rng);
    NoisyCopyDraft draft(target, agreement, seed ^ 0x55);
    int gamma = 1 + static_cast<int>(rng() % 8);
    auto prefix = random_prefix(seed);
    StopRule stop{1 + rng() % 60, nullptr};
    auto fast = speculative_decode(draft, target, prefix, gamma, stop);
    CHECK(fast.tokens == greedy_decode(target, prefix, stop).tokens);
    std::size_t appended = 0;
    for (const auto& r : fast.rounds) {
      CHECK(r.accepted_prefix_len <= static_cast<std::size_t>(gamma));
      appended += r.appended();
    }
    CHECK(appended == fast.tokens.size());
  }
}

TEST_CASE("round latency charges draft decode and one target pass") {
  BackendProfile small{"s", BackendRole::Small, 0.002, 40000};
  BackendProfile base{"b", BackendRole::Base, 0.05, 2000};
  DraftRound r;
  r.drafted = {"a ", "b ", "c "};
  CHECK(round_latency(r, small, base) == doctest::Approx(3 * 0.002 + 0.05 + 3 / 2000.0));
  CHECK_THROWS_AS(speculative_decode(SyntheticLm(1), SyntheticLm(1), {}, 0, StopRule{}),
                  std::invalid_argument);
}

TEST_CASE("step regeneration matches plain generation") {
  SimBackend small(simlab::default_small_model(), std::nullopt, 2);
  SimBackend base(simlab::default_base_model(), simlab::SimJudgeSpec{}, 2);
  for (std::uint64_t s = 0; s < 200; ++s) {
    GenerationRequest req;
    auto task = simlab::make_chain_task(s, 6);
    std::string cot;
    if (s % 3 == 1) cot = "Step 1: x = " + std::to_string(simlab::ground_truth(task, 1)) + ".\n";
    if (s % 3 == 2) cot = "Step 1: x = 0.\n";
    req.prompt = render_generation_prompt(simlab::render_problem(task), cot);
    req.max_tokens = s % 5 == 0 ? 4 : 256;
    req.stop = EngineConfig{}.step_stop_markers;
    req.seed_hint = s;
    auto plain = base.generate(req);
    auto regen = regenerate_with_specdecode(small, base, req, 1 + static_cast<int>(s % 8));
    CHECK(regen.result.text == plain.text);
    CHECK(regen.result.token_count == plain.token_count);
    CHECK(regen.result.finish_reason == plain.finish_reason);
    CHECK(regen.rounds_latency > 0);
  }
}

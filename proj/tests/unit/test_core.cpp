// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cctype>
#include <random>
#include <string>

#include "stepspec/core/rng.hpp"
#include "stepspec/core/serialize.hpp"
#include "stepspec/core/text.hpp"
#include "stepspec/core/types.hpp"

using namespace stepspec;

namespace {

// Character-level reference for prompt reuse: a token of `next` is already
// cached when it lies inside the common character prefix and, in `prev`, is
// followed by whitespace or the end of the text (so it was the same token).
Tokens reuse_oracle(const std::string& prev, const std::string& next) {
  std::size_t lcp = 0;
  while (lcp < prev.size() && lcp < next.size() && prev[lcp] == next[lcp]) ++lcp;
  Tokens total = 0, reused = 0;
  bool prefix_alive = true;
  std::size_t i = 0;
  while (i < next.size()) {
    while (i < next.size() && std::isspace(static_cast<unsigned char>(next[i]))) ++i;
    if (i == next.size()) break;
    while (i < next.size() && !std::isspace(static_cast<unsigned char>(next[i]))) ++i;
    ++total;
    bool ok = i <= lcp && (i == prev.size() ||
                           std::isspace(static_cast<unsigned char>(prev[i])));
    if (prefix_alive && ok) {
      ++reused;
    } else {
      prefix_alive = false;
    }
  }
  if (total == 0 && !next.empty()) total = 1;
  return total - reused;
}

std::string random_text(std::mt19937_64& rng) {
  static const char* words[] = {"a", "bb", "x", "=", "5.", "Step", "\n", " ", "\n\n", "7"};
  std::string s;
  int n = static_cast<int>(rng() % 12);
  for (int i = 0; i < n; ++i) s += words[rng() % 10];
  return s;
}

}  // namespace

TEST_CASE("token counting") {
  CHECK(count_tokens("") == 0);
  CHECK(count_tokens("   ") == 1);
  CHECK(count_tokens("Step 1: x = 5.\n") == 5);
  CHECK(count_tokens("  leading and trailing  ") == 3);
}

TEST_CASE("token pieces concatenate back to the text") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 500; ++t) {
    auto s = random_text(rng);
    std::string joined;
    for (const auto& p : token_pieces(s)) joined += p;
    CHECK(joined == s);
    if (!s.empty()) CHECK(static_cast<Tokens>(token_pieces(s).size()) == count_tokens(s));
  }
  CHECK(token_pieces(" a b\n") == std::vector<std::string>{" a ", "b\n"});
}

TEST_CASE("new prompt tokens match the character-level oracle") {
  CHECK(count_new_prompt_tokens("", "a b c") == 3);
  CHECK(count_new_prompt_tokens("a b c", "a b c d e") == 2);
  CHECK(count_new_prompt_tokens("a b cd", "a b c") == 1);
  CHECK(count_new_prompt_tokens("x = 5.\n\n[review]", "x = 5.\nStep") == 1);
  std::mt19937_64 rng(11);
  for (int t = 0; t < 3000; ++t) {
    auto common = random_text(rng);
    auto prev = common + random_text(rng);
    auto next = common + random_text(rng);
    INFO("prev=[" << prev << "] next=[" << next << "]");
    CHECK(count_new_prompt_tokens(prev, next) == reuse_oracle(prev, next));
  }
}

TEST_CASE("segmentation boundaries") {
  SegmentRules rules{{"\n\n", ".\n", "?\n", "!\n"}, "</think>", 256};
  auto s = segment_text("Compute 2+3 = 5.\n\nNext,", rules);
  CHECK(s.text == "Compute 2+3 = 5.\n\n");
  CHECK(s.finish == FinishReason::Stop);

  auto e = segment_text("done here </think>answer", rules);
  CHECK(e.text == "done here ");
  CHECK(e.finish == FinishReason::EndThink);

  auto empty = segment_text("</think>\n", rules);
  CHECK(empty.text.empty());
  CHECK(empty.token_count == 0);
  CHECK(empty.finish == FinishReason::EndThink);

  rules.max_tokens = 3;
  auto t = segment_text("one two three four five", rules);
  CHECK(t.text == "one two three ");
  CHECK(t.token_count == 3);
  CHECK(t.finish == FinishReason::Length);
}

TEST_CASE("utility score and threshold ranges") {
  CHECK_THROWS_AS(UtilityScore(10), std::out_of_range);
  CHECK_THROWS_AS(UtilityScore(-1), std::out_of_range);
  CHECK_THROWS_AS(AcceptanceThreshold(11), std::out_of_range);
  CHECK(AcceptanceThreshold().value() == 7);
  for (int s = 0; s <= 9; ++s) {
    CHECK(decide_acceptance(UtilityScore(s), AcceptanceThreshold(0)) == Decision::Accept);
    CHECK(decide_acceptance(UtilityScore(s), AcceptanceThreshold(10)) == Decision::Reject);
    for (int th = 0; th <= 10; ++th) {
      CHECK((decide_acceptance(UtilityScore(s), AcceptanceThreshold(th)) ==
             Decision::Accept) == (s >= th));
    }
  }
}

TEST_CASE("latency breakdown total") {
  ReasoningStep step;
  step.latency = {0.02, 0.085, 0.6};
  CHECK(total_latency(step) == doctest::Approx(0.705));
}

TEST_CASE("trajectory state guards its invariants") {
  TrajectoryState st("p", 10);
  ReasoningStep s;
  s.text = "a b c";
  s.token_count = 3;
  s.accepted = true;
  st.retain(s);
  CHECK(st.thinking_tokens_used() == 3);
  CHECK(st.remaining() == 7);

  auto rejected = s;
  rejected.accepted = false;
  CHECK_THROWS_AS(st.retain(rejected), std::logic_error);

  auto big = s;
  big.token_count = 8;
  CHECK_THROWS_AS(st.retain(big), std::logic_error);
  CHECK(st.thinking_tokens_used() == 3);

  CHECK_THROWS_AS(st.finish("x"), std::logic_error);
  st.begin_answer();
  CHECK_THROWS_AS(st.retain(s), std::logic_error);
  st.finish("answer");
  CHECK(st.phase() == Phase::Done);
  CHECK(st.violations().empty());
}

TEST_CASE("config validation names the field") {
  EngineConfig c;
  CHECK_NOTHROW(c.validate());
  c.draft_length = 0;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("draft_length"),
                       std::invalid_argument);
}

TEST_CASE("derived seeds are order sensitive and stable") {
  CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
  CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
  CHECK(derive_seed(1, {2}) != derive_seed(2, {2}));
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
}

TEST_CASE("serialization round trips") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 200; ++t) {
    EngineConfig c;
    c.threshold = AcceptanceThreshold(static_cast<int>(rng() % 11));
    c.force_first_n = static_cast<int>(rng() % 50);
    c.token_budget = 1 + static_cast<Tokens>(rng() % 10000);
    c.temperature = static_cast<double>(rng() % 100) / 50.0;
    c.draft_length = 1 + static_cast<int>(rng() % 8);
    c.hierarchical = rng() % 2;
    c.seed = rng();
    json j = c;
    CHECK(j.get<EngineConfig>() == c);
    CHECK(json::parse(j.dump()).get<EngineConfig>() == c);

    ReasoningStep s;
    s.index = rng() % 100;
    s.text = random_text(rng);
    s.token_count = count_tokens(s.text);
    s.producer = static_cast<StepProducer>(rng() % 3);
    if (s.producer == StepProducer::Speculator) s.score = UtilityScore(static_cast<int>(rng() % 10));
    s.accepted = rng() % 2;
    s.latency = {0.25 * (rng() % 5), 0.125 * (rng() % 3), 0.5 * (rng() % 7)};
    json js = s;
    CHECK(json::parse(js.dump()).get<ReasoningStep>() == s);
  }

  BackendProfile p{"small", BackendRole::Small, 0.0025, 40000};
  json jp = p;
  CHECK(jp.get<BackendProfile>() == p);

  TrajectoryState st("problem", 100);
  ReasoningStep s;
  s.text = "x = 1.\n";
  s.token_count = 3;
  s.accepted = true;
  st.retain(s);
  st.begin_answer();
  st.finish("Final answer: \\boxed{1}");
  json jt = st;
  CHECK(json::parse(jt.dump()).get<TrajectoryState>() == st);
}

TEST_CASE("schema errors carry the key path") {
  json j = {{"threshold", 3}, {"tresh", 4}};
  CHECK_THROWS_WITH_AS(engine_config_from_json(j, "engine"),
                       doctest::Contains("engine"), SchemaError);
  try {
    engine_config_from_json(json{{"threshold", 12}}, "engine");
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.path()).find("engine") == 0);
  }
  CHECK_THROWS_AS(engine_config_from_json(json{{"token_budget", "many"}}, "engine"),
                  SchemaError);
}

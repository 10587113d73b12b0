// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#include "stepspec/simlab/sim_model.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

namespace stepspec::simlab {
namespace {

constexpr std::array<std::string_view, 16> kFiller = {
    "so",    "then",  "now",  "apply", "the",  "next",  "update", "multiply",
    "and",   "add",   "hmm",  "okay",  "which", "gives", "we",    "get"};

constexpr double kBaseToSmallDecodeRatio = 21.3;

void check_prob(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must be in [0, 1]");
  }
}

bool starts_step(std::string_view line) {
  if (line.substr(0, 5) != "Step ") return false;
  std::size_t i = 5;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) {
    ++i;
  }
  return i > 5 && i < line.size() && line[i] == ':';
}

}  // namespace

void SimModelSpec::validate() const {
  check_prob(per_step_error_prob, "per_step_error_prob");
  check_prob(reflection_prob, "reflection_prob");
  check_prob(token_agreement, "token_agreement");
  check_prob(answer_error_prob, "answer_error_prob");
  if (!(verbosity >= 1.0)) throw std::invalid_argument("verbosity must be >= 1");
  profile.validate();
}

void SimJudgeSpec::validate() const {
  if (wrong_score_max < 0 || wrong_score_max >= correct_score.value()) {
    throw std::invalid_argument(
        "judge: wrong_score_max must be in [0, correct_score)");
  }
  check_prob(noise, "judge noise");
}

SimModelSpec default_base_model() {
  SimModelSpec s;
  s.per_step_error_prob = 0.0;
  s.verbosity = 12.0;
  s.reflection_prob = 0.5;
  s.profile = {"sim-base", BackendRole::Base, 0.05, 2000.0};
  return s;
}

SimModelSpec default_small_model() {
  SimModelSpec s;
  s.per_step_error_prob = 0.3;
  s.verbosity = 4.0;
  s.reflection_prob = 0.1;
  s.profile = {"sim-small", BackendRole::Small,
               0.05 / kBaseToSmallDecodeRatio, 2000.0 * kBaseToSmallDecodeRatio};
  return s;
}

bool step_is_valid(const ChainTask& task, std::size_t i,
                   std::int64_t prior_claimed, std::int64_t claimed) {
  return claimed == apply_update(task, i, prior_claimed) ||
         claimed == ground_truth(task, i + 1);
}

SimStep simulate_step_text(const SimModelSpec& spec, const ChainTask& task,
                           std::size_t i, std::int64_t prior_claimed,
                           Rng& rng) {
  const std::int64_t truth_prev = ground_truth(task, i);
  const std::int64_t truth_next = apply_update(task, i, truth_prev);
  const std::int64_t carried = apply_update(task, i, prior_claimed);

  SimStep out;
  std::int64_t intended = carried;
  if (prior_claimed != truth_prev && bernoulli(rng, spec.reflection_prob)) {
    out.reflected = true;
    intended = truth_next;
  }
  out.claimed = intended;
  if (bernoulli(rng, spec.per_step_error_prob)) {
    // Uniform over values that are neither valid continuation.
    std::int64_t skip_lo = std::min(carried, truth_next);
    std::int64_t skip_hi = std::max(carried, truth_next);
    std::int64_t n_valid = skip_lo == skip_hi ? 1 : 2;
    auto k = static_cast<std::int64_t>(
        rng() % static_cast<std::uint64_t>(task.modulus - n_valid));
    if (k >= skip_lo) ++k;
    if (n_valid == 2 && k >= skip_hi) ++k;
    out.claimed = k;
    out.correct = false;
  }

  std::poisson_distribution<int> filler_count(spec.verbosity);
  int n_filler = filler_count(rng);
  std::string filler;
  for (int f = 0; f < n_filler; ++f) {
    filler += kFiller[rng() % kFiller.size()];
    filler += ' ';
  }
  out.text = fmt::format("Step {}: {}{}x = {}.\n", i + 1,
                         out.reflected ? "wait, recheck: " : "", filler,
                         out.claimed);
  return out;
}

UtilityScore simulate_judge_score(const SimJudgeSpec& judge, bool correct,
                                  Rng& rng) {
  if (correct) return judge.correct_score;
  if (bernoulli(rng, judge.noise)) return judge.correct_score;
  return UtilityScore(static_cast<int>(
      rng() % static_cast<std::uint64_t>(judge.wrong_score_max + 1)));
}

std::optional<std::int64_t> read_claim(std::string_view step) {
  auto pos = step.rfind("x = ");
  if (pos == std::string_view::npos) return std::nullopt;
  std::size_t i = pos + 4;
  std::int64_t v = 0;
  std::size_t digits = 0;
  while (i < step.size() && std::isdigit(static_cast<unsigned char>(step[i])) &&
         digits < 18) {
    v = v * 10 + (step[i] - '0');
    ++i;
    ++digits;
  }
  if (digits == 0 || i >= step.size() || step[i] != '.') return std::nullopt;
  return v;
}

CotView read_cot(std::string_view cot) {
  CotView view;
  std::size_t pos = 0;
  while (pos < cot.size()) {
    auto nl = cot.find('\n', pos);
    auto line = cot.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    if (starts_step(line)) {
      ++view.steps_done;
      if (auto c = read_claim(line)) view.last_claim = c;
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return view;
}

std::int64_t prior_claim(const ChainTask& task, const CotView& view) {
  return view.last_claim.value_or(task.start);
}

std::string simulate_answer(const SimModelSpec& spec, const ChainTask& task,
                            const CotView& view, Rng& rng) {
  std::int64_t v = prior_claim(task, view);
  for (std::size_t i = std::min(view.steps_done, task.length());
       i < task.length(); ++i) {
    v = apply_update(task, i, v);
    if (bernoulli(rng, spec.answer_error_prob)) {
      v = (v + 1 + static_cast<std::int64_t>(rng() % (task.modulus - 1))) %
          task.modulus;
    }
  }
  return fmt::format("Final answer: \\boxed{{{}}}", v);
}

std::optional<std::string> extract_boxed(std::string_view text) {
  auto pos = text.rfind("\\boxed{");
  if (pos == std::string_view::npos) return std::nullopt;
  auto b = pos + 7;
  auto e = text.find('}', b);
  if (e == std::string_view::npos) return std::nullopt;
  std::string inner(text.substr(b, e - b));
  auto first = inner.find_first_not_of(" \t");
  auto last = inner.find_last_not_of(" \t");
  if (first == std::string::npos) return std::nullopt;
  return inner.substr(first, last - first + 1);
}

void to_json(json& j, const SimModelSpec& s) {
  j = json{{"per_step_error_prob", s.per_step_error_prob},
           {"verbosity", s.verbosity},
           {"profile", s.profile},
           {"reflection_prob", s.reflection_prob},
           {"token_agreement", s.token_agreement},
           {"answer_error_prob", s.answer_error_prob}};
}

void from_json(const json& j, SimModelSpec& s) {
  s = sim_model_from_json(j, "", SimModelSpec{});
}

SimModelSpec sim_model_from_json(const json& j, const std::string& path,
                                 const SimModelSpec& defaults) {
  SimModelSpec s = defaults;
  ObjectReader r(j, path);
  r.optional("per_step_error_prob", s.per_step_error_prob);
  r.optional("verbosity", s.verbosity);
  if (r.has("profile")) {
    // Partial profiles override only the fields they name.
    json merged = s.profile;
    for (const auto& [k, v] : r.raw("profile").items()) merged[k] = v;
    s.profile = backend_profile_from_json(merged, r.child("profile"));
  }
  r.optional("reflection_prob", s.reflection_prob);
  r.optional("token_agreement", s.token_agreement);
  r.optional("answer_error_prob", s.answer_error_prob);
  r.finish();
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(path, e.what());
  }
  return s;
}

void to_json(json& j, const SimJudgeSpec& s) {
  j = json{{"correct_score", s.correct_score},
           {"wrong_score_max", s.wrong_score_max},
           {"noise", s.noise}};
}

void from_json(const json& j, SimJudgeSpec& s) { s = sim_judge_from_json(j, ""); }

SimJudgeSpec sim_judge_from_json(const json& j, const std::string& path) {
  SimJudgeSpec s;
  ObjectReader r(j, path);
  r.optional("correct_score", s.correct_score);
  r.optional("wrong_score_max", s.wrong_score_max);
  r.optional("noise", s.noise);
  r.finish();
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(path, e.what());
  }
  return s;
}

}  // namespace stepspec::simlab

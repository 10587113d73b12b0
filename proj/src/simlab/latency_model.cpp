// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#include "stepspec/simlab/latency_model.hpp"

#include <stdexcept>

#include "stepspec/core/rng.hpp"
#include "stepspec/core/text.hpp"

namespace stepspec::simlab {

Seconds step_latency(const BackendProfile& profile, Tokens decoded,
                     Tokens prefilled) {
  if (decoded < 0 || prefilled < 0) {
    throw std::invalid_argument("step_latency: negative token count");
  }
  return static_cast<double>(decoded) * profile.decode_s_per_token +
         static_cast<double>(prefilled) / profile.prefill_tokens_per_s;
}

namespace {

// Linear in token counts, so it accepts expectations as well.
Seconds cost(const BackendProfile& p, double decoded, double prefilled) {
  return decoded * p.decode_s_per_token + prefilled / p.prefill_tokens_per_s;
}

}  // namespace

StepLatencyTerms expected_step_latency(double alpha,
                                       const StepCostModel& model) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must be in [0, 1]");
  }
  const double ls = model.expected_small_tokens();
  const double lb = model.expected_base_tokens();
  const auto& small = model.small.profile;
  const auto& base = model.base.profile;

  StepLatencyTerms t;
  t.speculate = cost(small, ls, 0);
  t.verify = cost(base, 1, ls + static_cast<double>(model.verify_tail_tokens));
  t.regenerate = cost(base, lb, 0) + cost(small, 0, lb);
  t.total = t.speculate + t.verify + (1.0 - alpha) * t.regenerate;
  return t;
}

Seconds expected_base_only_step_latency(const StepCostModel& model) {
  return cost(model.base.profile, model.expected_base_tokens(), 0);
}

MonteCarloLatency monte_carlo_step_latency(double alpha,
                                           const StepCostModel& model,
                                           std::size_t steps,
                                           std::uint64_t seed) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must be in [0, 1]");
  }
  if (steps == 0) throw std::invalid_argument("steps must be positive");
  const auto task = make_chain_task(seed, 1);
  const auto prior = task.start;
  const auto& small = model.small.profile;
  const auto& base = model.base.profile;

  MonteCarloLatency out;
  out.steps = steps;
  double sum = 0;
  double base_sum = 0;
  std::size_t accepted = 0;
  for (std::size_t n = 0; n < steps; ++n) {
    auto rng = make_rng(derive_seed(seed, {fnv1a("mc-step"), n}));
    auto spec_text = simulate_step_text(model.small, task, 0, prior, rng);
    auto base_text = simulate_step_text(model.base, task, 0, prior, rng);
    Tokens ls = count_tokens(spec_text.text);
    Tokens lb = count_tokens(base_text.text);

    Seconds t = step_latency(small, ls, 0) +
                step_latency(base, 1, ls + model.verify_tail_tokens);
    if (bernoulli(rng, alpha)) {
      ++accepted;
    } else {
      t += step_latency(base, lb, 0) + step_latency(small, 0, lb);
    }
    sum += t;
    base_sum += step_latency(base, lb, 0);
  }
  out.mean = sum / static_cast<double>(steps);
  out.base_only_mean = base_sum / static_cast<double>(steps);
  out.accept_rate = static_cast<double>(accepted) / static_cast<double>(steps);
  return out;
}

}  // namespace stepspec::simlab

// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>

#include "stepspec/backends/backend.hpp"
#include "stepspec/simlab/sim_model.hpp"

namespace stepspec {

// Deterministic stand-in for a model server, driven by the simlab chain-task
// models. Every result is a pure function of (seed, request.seed_hint,
// request.prompt), so concurrent callers never perturb one another.
//
// The prompt decides what the backend does:
//   - ends with the judge instruction line: score the last "Step k:" line
//     (needs a judge spec),
//   - contains the closed thinking block: write the final answer,
//   - otherwise: emit the next step, or the end-think marker once every
//     update of the task has a step.
class SimBackend final : public Backend {
 public:
  SimBackend(simlab::SimModelSpec model,
             std::optional<simlab::SimJudgeSpec> judge, std::uint64_t seed);

  const BackendProfile& profile() const override { return model_.profile; }
  GenerationResult generate(const GenerationRequest& req) const override;
  bool simulated() const override { return true; }
  bool supports_token_level() const override { return true; }

  std::unique_ptr<TokenModel> target_model(
      const GenerationRequest& req) const override;
  std::unique_ptr<TokenModel> draft_model(
      const GenerationRequest& req, const TokenModel& target) const override;

  const simlab::SimModelSpec& model() const { return model_; }
  const std::optional<simlab::SimJudgeSpec>& judge() const { return judge_; }

  // Unsegmented text the model would emit for `req`.
  std::string raw_stream(const GenerationRequest& req) const;

 private:
  Rng request_rng(const GenerationRequest& req) const;

  simlab::SimModelSpec model_;
  std::optional<simlab::SimJudgeSpec> judge_;
  std::uint64_t seed_;
};

}  // namespace stepspec

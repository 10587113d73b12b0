// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "stepspec/core/token_model.hpp"

namespace stepspec::specdecode {

// Pseudo-random greedy language model over a fixed vocabulary of pieces
// "t0 ", "t1 ", ...: the next token is a hash of the seed and the last
// `window` tokens of context.
class SyntheticLm final : public TokenModel {
 public:
  SyntheticLm(std::uint64_t seed, int vocab_size = 64, int window = 3);

  Token next_token(std::span<const Token> prefix,
                   std::span<const Token> generated) const override;

  int vocab_size() const { return vocab_size_; }
  static Token piece(int id);

 private:
  std::uint64_t seed_;
  int vocab_size_;
  int window_;
};

// Agrees with `target` with probability `agreement` per position, otherwise
// proposes a different vocabulary token.
class NoisyCopyDraft final : public TokenModel {
 public:
  NoisyCopyDraft(const TokenModel& target, double agreement, std::uint64_t seed,
                 int vocab_size = 64);

  Token next_token(std::span<const Token> prefix,
                   std::span<const Token> generated) const override;

 private:
  const TokenModel& target_;
  double agreement_;
  std::uint64_t seed_;
  int vocab_size_;
};

}  // namespace stepspec::specdecode

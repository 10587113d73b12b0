// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#include "stepspec/specdecode/synthetic.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "stepspec/core/rng.hpp"

namespace stepspec::specdecode {
namespace {

// Hash of the last `window` tokens of prefix ++ generated, plus the length.
std::uint64_t context_hash(std::uint64_t seed, std::span<const Token> prefix,
                           std::span<const Token> generated, int window) {
  std::uint64_t h = splitmix64(seed ^ (prefix.size() + generated.size()));
  const std::size_t total = prefix.size() + generated.size();
  const std::size_t from =
      total > static_cast<std::size_t>(window) ? total - window : 0;
  for (std::size_t i = from; i < total; ++i) {
    const Token& t =
        i < prefix.size() ? prefix[i] : generated[i - prefix.size()];
    h = splitmix64(h ^ fnv1a(t));
  }
  return h;
}

}  // namespace

SyntheticLm::SyntheticLm(std::uint64_t seed, int vocab_size, int window)
    : seed_(seed), vocab_size_(vocab_size), window_(window) {
  if (vocab_size < 2) throw std::invalid_argument("vocabulary too small");
  if (window < 1) throw std::invalid_argument("context window must be >= 1");
}

Token SyntheticLm::piece(int id) { return "t" + std::to_string(id) + " "; }

Token SyntheticLm::next_token(std::span<const Token> prefix,
                              std::span<const Token> generated) const {
  auto h = context_hash(seed_, prefix, generated, window_);
  return piece(static_cast<int>(h % static_cast<std::uint64_t>(vocab_size_)));
}

NoisyCopyDraft::NoisyCopyDraft(const TokenModel& target, double agreement,
                               std::uint64_t seed, int vocab_size)
    : target_(target),
      agreement_(agreement),
      seed_(seed),
      vocab_size_(vocab_size) {
  if (!(agreement >= 0.0 && agreement <= 1.0)) {
    throw std::invalid_argument("agreement must be in [0, 1]");
  }
}

Token NoisyCopyDraft::next_token(std::span<const Token> prefix,
                                 std::span<const Token> generated) const {
  Token want = target_.next_token(prefix, generated);
  auto rng = make_rng(context_hash(seed_, prefix, generated, 2));
  if (uniform01(rng) < agreement_) return want;
  Token other = SyntheticLm::piece(
      static_cast<int>(rng() % static_cast<std::uint64_t>(vocab_size_)));
  if (other == want) other = want == SyntheticLm::piece(0) ? SyntheticLm::piece(1)
                                                           : SyntheticLm::piece(0);
  return other;
}

}  // namespace stepspec::specdecode

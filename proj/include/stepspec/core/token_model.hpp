// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>

namespace stepspec {

// A token is a text piece (see token_pieces); concatenating pieces gives the
// text back. The empty piece marks end of stream.
using Token = std::string;
inline const Token kEndOfStream{};

// Greedy next-token oracle over (prompt tokens, tokens generated so far).
// Implementations are deterministic and safe to call concurrently.
class TokenModel {
 public:
  virtual ~TokenModel() = default;
  virtual Token next_token(std::span<const Token> prefix,
                           std::span<const Token> generated) const = 0;
};

}  // namespace stepspec

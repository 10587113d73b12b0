// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#include "stepspec/backends/backend.hpp"

namespace stepspec {

std::unique_ptr<TokenModel> Backend::target_model(
    const GenerationRequest&) const {
  throw UnsupportedBackend("backend '" + profile().name +
                           "' does not expose token-level verification");
}

std::unique_ptr<TokenModel> Backend::draft_model(const GenerationRequest&,
                                                 const TokenModel&) const {
  throw UnsupportedBackend("backend '" + profile().name +
                           "' does not expose token-level drafting");
}

}  // namespace stepspec

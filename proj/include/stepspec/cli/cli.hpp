// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stepspec/bench/experiment.hpp"

namespace stepspec::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

// A config or flag problem, reported before any backend call or file write.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bare keys address engine.* unless they name a top-level section.
std::string qualify_key(const std::string& key);

// Sets a dotted key from "key=value", qualified as above. The value is read
// as JSON when it parses, else as a string.
void apply_override(json& config, const std::string& assignment);

struct LoadOptions {
  std::vector<std::string> overrides;
  std::optional<std::string> backend_url;
  std::optional<std::string> api_key_env;
};

// Parses, overrides and validates an experiment config. Errors carry the
// file name and the line of the offending key.
bench::ExperimentSpec load_experiment(const std::string& text,
                                      const std::string& file_name,
                                      const std::string& base_dir,
                                      const LoadOptions& options);

// Entry point shared by the executable and the tests.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace stepspec::cli

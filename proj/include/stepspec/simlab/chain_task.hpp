// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stepspec/core/serialize.hpp"

namespace stepspec::simlab {

// x_{i+1} = (a_i * x_i + b_i) mod m, starting from x_0 = start.
struct ChainTask {
  struct Update {
    std::int64_t a = 1;
    std::int64_t b = 0;
    bool operator==(const Update&) const = default;
  };

  std::int64_t modulus = 97;
  std::int64_t start = 0;
  std::vector<Update> updates;

  std::size_t length() const { return updates.size(); }
  void validate() const;
  bool operator==(const ChainTask&) const = default;
};

// Applies update i to `value`.
std::int64_t apply_update(const ChainTask& task, std::size_t i,
                          std::int64_t value);

// State after i updates; ground_truth(task, 0) == start.
std::int64_t ground_truth(const ChainTask& task, std::size_t i);

std::int64_t final_answer(const ChainTask& task);

ChainTask make_chain_task(std::uint64_t seed, std::size_t steps);

// Natural-language problem statement; parse_problem() inverts it and also
// finds it embedded inside a longer prompt.
std::string render_problem(const ChainTask& task);
std::optional<ChainTask> parse_problem(std::string_view prompt);

void to_json(json& j, const ChainTask& t);
void from_json(const json& j, ChainTask& t);

}  // namespace stepspec::simlab

// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#include "stepspec/simlab/chain_task.hpp"

#include <array>
#include <stdexcept>

#include <fmt/format.h>

#include "stepspec/core/rng.hpp"

namespace stepspec::simlab {
namespace {

constexpr std::array<std::int64_t, 8> kPrimeModuli = {89,  97,  101, 103,
                                                      107, 109, 113, 127};

std::int64_t mod(std::int64_t v, std::int64_t m) {
  auto r = v % m;
  return r < 0 ? r + m : r;
}

}  // namespace

void ChainTask::validate() const {
  if (modulus < 3) throw std::invalid_argument("chain task: modulus must be >= 3");
  if (start < 0 || start >= modulus) {
    throw std::invalid_argument("chain task: start must be in [0, modulus)");
  }
  if (updates.empty()) throw std::invalid_argument("chain task: no updates");
  for (const auto& u : updates) {
    if (u.a < 0 || u.a >= modulus || u.b < 0 || u.b >= modulus) {
      throw std::invalid_argument(
          "chain task: coefficients must be in [0, modulus)");
    }
  }
}

std::int64_t apply_update(const ChainTask& task, std::size_t i,
                          std::int64_t value) {
  const auto& u = task.updates.at(i);
  return mod(u.a * value + u.b, task.modulus);
}

std::int64_t ground_truth(const ChainTask& task, std::size_t i) {
  if (i > task.length()) throw std::out_of_range("ground_truth: index past N");
  std::int64_t v = task.start;
  for (std::size_t k = 0; k < i; ++k) v = apply_update(task, k, v);
  return v;
}

std::int64_t final_answer(const ChainTask& task) {
  return ground_truth(task, task.length());
}

ChainTask make_chain_task(std::uint64_t seed, std::size_t steps) {
  auto rng = make_rng(derive_seed(seed, {fnv1a("chain-task")}));
  ChainTask t;
  t.modulus = kPrimeModuli[rng() % kPrimeModuli.size()];
  t.start = static_cast<std::int64_t>(rng() % t.modulus);
  t.updates.reserve(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    ChainTask::Update u;
    u.a = 1 + static_cast<std::int64_t>(rng() % (t.modulus - 1));
    u.b = static_cast<std::int64_t>(rng() % t.modulus);
    t.updates.push_back(u);
  }
  return t;
}

std::string render_problem(const ChainTask& task) {
  std::string out = fmt::format(
      "Let x = {}. Apply these {} updates in order, reducing modulo {} after "
      "each:",
      task.start, task.length(), task.modulus);
  for (std::size_t i = 0; i < task.updates.size(); ++i) {
    out += fmt::format(" x -> {}x + {}{}", task.updates[i].a,
                       task.updates[i].b,
                       i + 1 == task.updates.size() ? "." : ";");
  }
  out += " What is the final value of x?";
  return out;
}

std::optional<ChainTask> parse_problem(std::string_view prompt) {
  auto pos = prompt.find("Let x = ");
  if (pos == std::string_view::npos) return std::nullopt;
  std::string_view rest = prompt.substr(pos + 8);

  auto expect = [&rest](std::string_view lit) {
    if (rest.substr(0, lit.size()) != lit) return false;
    rest.remove_prefix(lit.size());
    return true;
  };
  auto number = [&rest](std::int64_t& out) {
    std::size_t n = 0;
    out = 0;
    while (n < rest.size() && rest[n] >= '0' && rest[n] <= '9' && n < 18) {
      out = out * 10 + (rest[n] - '0');
      ++n;
    }
    rest.remove_prefix(n);
    return n > 0;
  };

  ChainTask t;
  std::int64_t count = 0;
  if (!number(t.start) || !expect(". Apply these ") || !number(count) ||
      !expect(" updates in order, reducing modulo ") || !number(t.modulus) ||
      !expect(" after each:")) {
    return std::nullopt;
  }
  for (std::int64_t i = 0; i < count; ++i) {
    ChainTask::Update u;
    if (!expect(" x -> ") || !number(u.a) || !expect("x + ") || !number(u.b) ||
        !expect(i + 1 == count ? "." : ";")) {
      return std::nullopt;
    }
    t.updates.push_back(u);
  }
  if (!expect(" What is the final value of x?")) return std::nullopt;
  try {
    t.validate();
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
  return t;
}

void to_json(json& j, const ChainTask& t) {
  json coeffs = json::array();
  for (const auto& u : t.updates) coeffs.push_back({u.a, u.b});
  j = json{{"m", t.modulus}, {"s0", t.start}, {"coefficients", coeffs}};
}

void from_json(const json& j, ChainTask& t) {
  ObjectReader r(j, "task");
  r.required("m", t.modulus);
  r.required("s0", t.start);
  const auto& coeffs = r.raw("coefficients");
  r.finish();
  if (!coeffs.is_array()) {
    throw SchemaError("task.coefficients", "expected an array of [a, b] pairs");
  }
  t.updates.clear();
  for (const auto& c : coeffs) {
    if (!c.is_array() || c.size() != 2) {
      throw SchemaError("task.coefficients", "expected [a, b] pairs");
    }
    t.updates.push_back({c[0].get<std::int64_t>(), c[1].get<std::int64_t>()});
  }
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError("task", e.what());
  }
}

}  // namespace stepspec::simlab

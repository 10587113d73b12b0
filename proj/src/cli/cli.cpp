// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#include "stepspec/cli/cli.hpp"

#include <fmt/format.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "stepspec/backends/http_backend.hpp"
#include "stepspec/bench/report.hpp"
#include "stepspec/engine/trace.hpp"
#include "stepspec/simlab/latency_model.hpp"

namespace stepspec::cli {
namespace fs = std::filesystem;
namespace {

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::string seg;
  for (char c : path) {
    if (c == '.') {
      out.push_back(seg);
      seg.clear();
    } else {
      seg += c;
    }
  }
  out.push_back(seg);
  return out;
}

std::size_t line_of(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(
                 std::count(text.begin(), text.begin() + offset, '\n'));
}

// Line of the deepest key of `path` found in order in the raw text; 0 when
// none is found (the key came from defaults or an override).
std::size_t locate_key(const std::string& text, const std::string& path) {
  std::size_t pos = 0, found = std::string::npos;
  for (auto seg : split_path(path)) {
    if (auto b = seg.find('['); b != std::string::npos) seg.resize(b);
    if (seg.empty()) continue;
    auto at = text.find("\"" + seg + "\"", pos);
    if (at == std::string::npos) break;
    found = at;
    pos = at + seg.size() + 2;
  }
  return found == std::string::npos ? 0 : line_of(text, found);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json switch_to_http(const json& old, const std::string& url) {
  json b = {{"kind", "http"}};
  if (old.is_object() && old.value("kind", "sim") == "http") b = old;
  if (old.is_object() && old.value("kind", "sim") == "sim" &&
      old.contains("model") && old["model"].is_object() &&
      old["model"].contains("profile")) {
    b["profile"] = old["model"]["profile"];
  }
  b["base_url"] = url;
  return b;
}

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output_dir;
  std::optional<int> parallelism;
  std::optional<std::string> backend_url;
  std::optional<std::string> api_key_env;
};

void add_common(CLI::App* cmd, Common& c, bool needs_config) {
  auto* opt = cmd->add_option("--config", c.config_path, "Experiment config (JSON)");
  if (needs_config) opt->required();
  cmd->add_option("--overrides", c.overrides,
                  "key=value settings; bare engine keys need no prefix")
      ->expected(0, -1);
  cmd->add_option("--output-dir", c.output_dir, "Directory for all outputs");
  cmd->add_option("--parallelism", c.parallelism, "Concurrent trajectories")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--backend-url", c.backend_url,
                  "Send both roles to this OpenAI-compatible server");
  cmd->add_option("--api-key-env", c.api_key_env,
                  "Environment variable holding the API key");
}

bench::ExperimentSpec load(const Common& c) {
  LoadOptions o{c.overrides, c.backend_url, c.api_key_env};
  auto base_dir = fs::path(c.config_path).parent_path().string();
  auto spec = load_experiment(read_text(c.config_path), c.config_path, base_dir, o);
  if (c.parallelism) spec.parallelism = *c.parallelism;
  return spec;
}

void print_run(std::ostream& out, const engine::TrajectoryResult& r,
               const bench::Problem& problem, bench::Scheme scheme) {
  out << fmt::format("scheme {}  problem {}\n", to_string(scheme), problem.id);
  out << fmt::format("{:>5} {:<11} {:>5} {:<24} {:>6} {:>10}\n", "step",
                     "producer", "score", "action", "tokens", "latency_s");
  std::size_t rej = 0;
  for (const auto& o : r.outcomes) {
    std::string score = o.step.score ? std::to_string(o.step.score->value()) : "-";
    if (o.action == engine::StepAction::RejectedThenRegenerated) {
      while (rej < r.rejected_steps.size() &&
             r.rejected_steps[rej].index < o.step.index) {
        ++rej;
      }
      if (rej < r.rejected_steps.size() && r.rejected_steps[rej].score) {
        score = "(" + std::to_string(r.rejected_steps[rej].score->value()) + ")";
      }
    }
    out << fmt::format("{:>5} {:<11} {:>5} {:<24} {:>6} {:>10.4f}\n",
                       o.step.index, to_string(o.step.producer), score,
                       to_string(o.action), o.step.token_count,
                       o.step.latency.total());
  }
  const auto& t = r.totals;
  out << fmt::format(
      "thinking tokens {} / {}{}  rejected {}  answer {:.4f} s  total {:.4f} s\n",
      t.thinking_tokens, r.state.budget(),
      t.budget_exhausted ? " (budget exhausted)" : "", t.rejected_count,
      t.answer_latency_s, t.latency_s);
  if (t.accepted_fraction) {
    out << fmt::format("accepted fraction {:.4f}\n", *t.accepted_fraction);
  }
  out << fmt::format("final answer: {}  expected {}  {}\n",
                     r.state.final_answer().value_or(""), problem.answer,
                     bench::is_correct(problem, r.state.final_answer())
                         ? "correct"
                         : "wrong");
}

int cmd_run(const Common& c, const std::string& scheme_name,
            std::size_t problem_index, std::ostream& out) {
  auto spec = load(c);
  auto scheme = bench::Scheme::SpecReason;
  if (!scheme_name.empty()) {
    try {
      scheme = bench::parse_scheme(scheme_name);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("--scheme: ") + e.what());
    }
  } else if (!spec.schemes.empty()) {
    scheme = spec.schemes.front();
  }
  if (problem_index >= spec.problems.size()) {
    throw ConfigError(fmt::format("--problem {} out of range (suite has {})",
                                  problem_index, spec.problems.size()));
  }
  auto backends = bench::make_backends(spec);
  const auto& problem = spec.problems[problem_index];
  auto result = bench::run_scheme(scheme, spec.engine, problem.text,
                                  *backends.small, *backends.base);
  print_run(out, result, problem, scheme);

  json tag = {{"scheme", to_string(scheme)},
              {"problem", problem.id},
              {"correct", bench::is_correct(problem, result.state.final_answer())}};
  auto records = engine::trace_records(result, tag);
  auto bad = engine::validate_trace(records);
  for (const auto& b : bad) out << "trace check: " << b << "\n";
  if (!c.output_dir.empty()) {
    fs::create_directories(c.output_dir);
    std::ofstream os(fs::path(c.output_dir) / "trace.jsonl");
    for (const auto& rec : records) os << rec.dump() << '\n';
  }
  return bad.empty() ? kExitOk : kExitRuntime;
}

int cmd_sweep(const Common& c, std::ostream& out) {
  auto spec = load(c);
  auto backends = bench::make_backends(spec);
  const std::string dir = c.output_dir.empty() ? "results" : c.output_dir;
  auto res = bench::run_sweep(spec, backends, {spec.parallelism, true});
  bench::write_outputs(dir, spec, res);
  bench::write_results_csv(out, res.cells);
  std::size_t failures = 0;
  for (const auto& cell : res.cells) failures += cell.failures;
  if (failures) {
    out << fmt::format("{} runs failed; see {}/summary.json\n", failures, dir);
  }
  return kExitOk;
}

int cmd_simulate(const Common& c, std::vector<double> alphas, std::size_t steps,
                 std::uint64_t seed, std::ostream& out) {
  simlab::StepCostModel model;
  if (!c.config_path.empty()) {
    auto spec = load(c);
    if (spec.small.kind != bench::BackendSpec::Kind::Sim ||
        spec.base.kind != bench::BackendSpec::Kind::Sim) {
      throw ConfigError("simulate needs simulated backends in the config");
    }
    model.small = spec.small.sim;
    model.base = spec.base.sim;
  }
  if (alphas.empty()) alphas = {0.0, 0.381, 0.5, 0.7, 0.8, 1.0};
  for (double a : alphas) {
    if (!(a >= 0 && a <= 1)) throw ConfigError("--alpha must be in [0, 1]");
  }
  if (steps == 0) throw ConfigError("--steps must be positive");

  const double base_only = simlab::expected_base_only_step_latency(model);
  out << fmt::format("{:>7} {:>12} {:>12} {:>9} {:>9} {:>9}\n", "alpha",
                     "closed_s", "monte_s", "rel_err", "accept", "speedup");
  json rows = json::array();
  bool all_close = true;
  for (double a : alphas) {
    auto cf = simlab::expected_step_latency(a, model);
    auto mc = simlab::monte_carlo_step_latency(a, model, steps, seed);
    double rel = std::abs(mc.mean - cf.total) / cf.total;
    all_close = all_close && rel <= 0.01;
    out << fmt::format("{:>7.3f} {:>12.6f} {:>12.6f} {:>9.5f} {:>9.4f} {:>9.3f}\n",
                       a, cf.total, mc.mean, rel, mc.accept_rate,
                       base_only / cf.total);
    rows.push_back({{"alpha", a},
                    {"closed_form_s", cf.total},
                    {"speculate_s", cf.speculate},
                    {"verify_s", cf.verify},
                    {"regenerate_s", cf.regenerate},
                    {"monte_carlo_s", mc.mean},
                    {"relative_error", rel},
                    {"accept_rate", mc.accept_rate},
                    {"speedup", base_only / cf.total}});
  }
  out << fmt::format("base-only step {:.6f} s; {} within 1%\n", base_only,
                     all_close ? "all" : "NOT all");
  if (!c.output_dir.empty()) {
    fs::create_directories(c.output_dir);
    std::ofstream os(fs::path(c.output_dir) / "simulate.json");
    os << json{{"steps", steps}, {"seed", seed}, {"rows", rows}}.dump(2) << "\n";
  }
  return kExitOk;
}

struct ProfileArgs {
  std::string model;
  std::string role = "Base";
  int trials = 3;
  int decode_tokens = 64;
  int prefill_tokens = 1024;
};

int cmd_profile(const Common& c, const ProfileArgs& p, std::ostream& out) {
  if (!c.backend_url) throw ConfigError("profile needs --backend-url");
  if (p.trials < 1 || p.decode_tokens < 2 || p.prefill_tokens < 1) {
    throw ConfigError("profile: trials >= 1, decode tokens >= 2, prefill tokens >= 1");
  }
  HttpBackendOptions o;
  o.base_url = *c.backend_url;
  o.model = p.model;
  o.api_key_env = c.api_key_env.value_or("");
  o.profile.name = p.model.empty() ? "profiled" : p.model;
  try {
    o.profile.role = parse_backend_role(p.role);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("--role: ") + e.what());
  }
  HttpBackend backend(o);

  auto timed = [&](const std::string& prompt, Tokens max_tokens) {
    GenerationRequest req;
    req.prompt = prompt;
    req.max_tokens = max_tokens;
    auto t0 = std::chrono::steady_clock::now();
    auto r = backend.generate(req);
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                   .count();
    return std::pair<double, Tokens>(s, r.token_count);
  };

  std::vector<double> decode_rates, prefill_rates;
  for (int t = 0; t < p.trials; ++t) {
    // Distinct prompts per trial so a prefix cache cannot hide the prefill.
    const std::string tagline = fmt::format("Trial {} of a timing probe.", t);
    std::string long_prompt = tagline;
    for (int i = 0; i < p.prefill_tokens; ++i) long_prompt += fmt::format(" w{}", i * 7 + t);
    auto [t_one, n_one] = timed(tagline + " Count upward:", 1);
    auto [t_many, n_many] = timed(tagline + " Count upward:", p.decode_tokens);
    auto [t_long, n_long] = timed(long_prompt, 1);
    (void)n_one;
    (void)n_long;
    if (n_many > 1 && t_many > t_one) {
      decode_rates.push_back((t_many - t_one) / static_cast<double>(n_many - 1));
    }
    if (t_long > t_one) {
      prefill_rates.push_back(static_cast<double>(p.prefill_tokens) / (t_long - t_one));
    }
  }
  if (decode_rates.empty() || prefill_rates.empty()) {
    throw BackendError("timings too noisy to separate decode from prefill");
  }
  o.profile.decode_s_per_token = bench::median(decode_rates);
  o.profile.prefill_tokens_per_s = bench::median(prefill_rates);
  json profile = o.profile;
  out << profile.dump(2) << "\n";
  if (!c.output_dir.empty()) {
    fs::create_directories(c.output_dir);
    std::ofstream os(fs::path(c.output_dir) / "profile.json");
    os << profile.dump(2) << "\n";
  }
  return kExitOk;
}

int cmd_compare(const Common& c, const std::string& a, const std::string& b,
                std::ostream& out) {
  std::ifstream ia(a), ib(b);
  if (!ia) throw ConfigError("cannot open " + a);
  if (!ib) throw ConfigError("cannot open " + b);
  std::string table;
  try {
    table = bench::compare_results(ia, ib);
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  out << table;
  if (!c.output_dir.empty()) {
    fs::create_directories(c.output_dir);
    std::ofstream os(fs::path(c.output_dir) / "compare.txt");
    os << table;
  }
  return kExitOk;
}

}  // namespace

std::string qualify_key(const std::string& key) {
  static const std::set<std::string> top = {"schemes", "repeats", "parallelism",
                                            "problems", "sweep", "backends"};
  if (key.find('.') != std::string::npos || top.count(key)) return key;
  return "engine." + key;
}

void apply_override(json& config, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "': expected key=value");
  }
  const std::string key = qualify_key(assignment.substr(0, eq));
  const std::string raw = assignment.substr(eq + 1);

  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &config;
  auto segs = split_path(key);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (segs[i].empty()) throw ConfigError("override '" + assignment + "': empty key");
    if (!node->is_object()) {
      throw ConfigError("override '" + assignment + "': " + segs[i - 1] +
                        " is not an object");
    }
    if (i + 1 == segs.size()) {
      (*node)[segs[i]] = value;
    } else {
      node = &(*node)[segs[i]];
      if (node->is_null()) *node = json::object();
    }
  }
}

bench::ExperimentSpec load_experiment(const std::string& text,
                                      const std::string& file_name,
                                      const std::string& base_dir,
                                      const LoadOptions& options) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}:{}: invalid JSON: {}", file_name,
                                  line_of(text, e.byte ? e.byte - 1 : 0),
                                  e.what()));
  }
  if (!j.is_object()) throw ConfigError(file_name + ":1: expected a JSON object");

  if (options.backend_url) {
    json& b = j["backends"];
    if (b.is_null()) b = json::object();
    if (!b.is_object()) throw ConfigError(file_name + ": backends must be an object");
    for (const char* role : {"small", "base"}) {
      b[role] = switch_to_http(b.contains(role) ? b[role] : json(), *options.backend_url);
    }
  }
  if (options.api_key_env) {
    for (auto& [role, b] : j["backends"].items()) {
      if (b.is_object() && b.value("kind", "sim") == "http") {
        b["api_key_env"] = *options.api_key_env;
      }
    }
    if (j["backends"].is_null()) j.erase("backends");
  }
  std::vector<std::string> override_keys;
  for (const auto& o : options.overrides) {
    apply_override(j, o);
    auto k = o.substr(0, o.find('='));
    override_keys.push_back(qualify_key(k));
  }

  try {
    return bench::experiment_from_json(j, base_dir);
  } catch (const SchemaError& e) {
    for (const auto& k : override_keys) {
      if (!e.path().empty() && (e.path() == k || e.path().rfind(k + ".", 0) == 0 ||
                                k.rfind(e.path() + ".", 0) == 0)) {
        throw ConfigError("override " + k + ": " + e.what());
      }
    }
    auto line = locate_key(text, e.path());
    throw ConfigError(fmt::format("{}:{}: {}", file_name, line ? line : 1, e.what()));
  } catch (const std::exception& e) {
    throw ConfigError(file_name + ": " + e.what());
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Step-level speculative reasoning: engine, simulator and benchmarks"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off");

  Common c;
  auto* run = app.add_subcommand("run", "Run one trajectory and print its trace");
  add_common(run, c, true);
  std::string scheme;
  std::size_t problem = 0;
  run->add_option("--scheme", scheme, "BaseOnly, SmallOnly, SpecDecode, SpecReason, SpecReasonDecode");
  run->add_option("--problem", problem, "Index into the problem suite");

  auto* sweep = app.add_subcommand("sweep", "Run a benchmark sweep");
  add_common(sweep, c, true);

  auto* simulate = app.add_subcommand(
      "simulate", "Compare the closed-form step latency with Monte-Carlo");
  add_common(simulate, c, false);
  std::vector<double> alphas;
  std::size_t steps = 100000;
  std::uint64_t seed = 0;
  simulate->add_option("--alpha", alphas, "Acceptance rates")->expected(1, -1);
  simulate->add_option("--steps", steps, "Simulated steps per alpha");
  simulate->add_option("--seed", seed, "Root seed");

  auto* profile = app.add_subcommand("profile", "Measure a live server's decode and prefill rates");
  add_common(profile, c, false);
  ProfileArgs pa;
  profile->add_option("--model", pa.model, "Model name sent to the server");
  profile->add_option("--role", pa.role, "Small or Base");
  profile->add_option("--trials", pa.trials, "Repetitions (median is kept)");
  profile->add_option("--decode-tokens", pa.decode_tokens, "Tokens in the decode probe");
  profile->add_option("--prefill-tokens", pa.prefill_tokens, "Words in the prefill probe");

  auto* compare = app.add_subcommand("compare", "Delta table of two results.csv files");
  add_common(compare, c, false);
  std::string file_a, file_b;
  compare->add_option("a", file_a, "First results.csv")->required();
  compare->add_option("b", file_b, "Second results.csv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("stepspec", sink);
  logger->set_level(spdlog::level::from_str(log_level));
  auto previous = spdlog::default_logger();
  spdlog::set_default_logger(logger);
  struct Restore {
    std::shared_ptr<spdlog::logger> p;
    ~Restore() { spdlog::set_default_logger(p); }
  } restore{previous};

  try {
    if (*run) return cmd_run(c, scheme, problem, out);
    if (*sweep) return cmd_sweep(c, out);
    if (*simulate) return cmd_simulate(c, alphas, steps, seed, out);
    if (*profile) return cmd_profile(c, pa, out);
    if (*compare) return cmd_compare(c, file_a, file_b, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace stepspec::cli

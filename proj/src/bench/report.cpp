// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#include "stepspec/bench/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "stepspec/engine/trace.hpp"

namespace stepspec::bench {
namespace {

std::string num(double v) { return fmt::format("{}", v); }

std::string opt(const std::optional<double>& v) { return v ? num(*v) : ""; }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << text;
}

json opt_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

const char* const kPalette[] = {"#1b6ca8", "#d1495b", "#66a182", "#edae49",
                                "#8d6a9f"};

}  // namespace

const std::vector<std::string>& results_columns() {
  static const std::vector<std::string> cols = {
      "schema_version",       "scheme",
      "knob",                 "value",
      "threshold",            "force_first_n",
      "token_budget",         "draft_length",
      "repeats",              "problems",
      "runs",                 "failures",
      "pass_at_1",            "mean_latency_s",
      "median_latency_s",     "mean_accepted_fraction",
      "mean_thinking_tokens", "median_thinking_tokens",
      "budget_exhausted_fraction", "mean_forced_steps"};
  return cols;
}

void write_results_csv(std::ostream& os, const std::vector<CellResult>& cells) {
  const auto& cols = results_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& c : cells) {
    std::vector<std::string> f = {
        std::to_string(kResultsSchemaVersion),
        std::string(to_string(c.scheme)),
        std::string(to_string(c.knob)),
        std::to_string(c.value),
        std::to_string(c.config.threshold.value()),
        std::to_string(c.config.force_first_n),
        std::to_string(c.config.token_budget),
        std::to_string(c.config.draft_length),
        std::to_string(c.repeats),
        std::to_string(c.problems),
        std::to_string(c.runs),
        std::to_string(c.failures),
        opt(c.pass_at_1),
        num(c.mean_latency_s),
        num(c.median_latency_s),
        opt(c.mean_accepted_fraction),
        num(c.mean_thinking_tokens),
        num(c.median_thinking_tokens),
        num(c.budget_exhausted_fraction),
        num(c.mean_forced_steps)};
    for (std::size_t i = 0; i < f.size(); ++i) os << (i ? "," : "") << f[i];
    os << '\n';
  }
}

std::vector<std::map<std::string, std::string>> read_results_csv(
    std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("results file is empty");
  auto header = split_csv(line);
  if (header.empty() || header[0] != "schema_version") {
    throw std::runtime_error("not a results file: missing schema_version column");
  }
  std::vector<std::map<std::string, std::string>> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != header.size()) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": expected " +
                               std::to_string(header.size()) + " fields, got " +
                               std::to_string(f.size()));
    }
    if (f[0] != std::to_string(kResultsSchemaVersion)) {
      throw std::runtime_error("line " + std::to_string(lineno) +
                               ": unsupported schema_version " + f[0]);
    }
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < f.size(); ++i) row[header[i]] = f[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

json summary_json(const ExperimentSpec& spec, const SweepOutput& out) {
  const auto sweep = spec.effective_sweep();
  json cells = json::array();
  for (const auto& c : out.cells) {
    json cell = {{"scheme", to_string(c.scheme)},
                 {"knob", to_string(c.knob)},
                 {"value", c.value},
                 {"runs", c.runs},
                 {"failures", c.failures},
                 {"pass_at_1", opt_json(c.pass_at_1)},
                 {"mean_latency_s", c.mean_latency_s},
                 {"median_latency_s", c.median_latency_s},
                 {"mean_accepted_fraction", opt_json(c.mean_accepted_fraction)},
                 {"mean_thinking_tokens", c.mean_thinking_tokens},
                 {"median_thinking_tokens", c.median_thinking_tokens},
                 {"budget_exhausted_fraction", c.budget_exhausted_fraction},
                 {"mean_forced_steps", c.mean_forced_steps}};

    // Speedup against the base-only cell at the same knob value, when both
    // ran cleanly.
    auto runs_of = [&](Scheme s) {
      std::vector<RunMetrics> m;
      for (const auto& r : out.runs) {
        if (r.scheme == s && r.value == c.value && r.metrics) m.push_back(*r.metrics);
      }
      return m;
    };
    cell["speedup_vs_base_only"] = nullptr;
    if (std::find(spec.schemes.begin(), spec.schemes.end(), Scheme::BaseOnly) !=
        spec.schemes.end()) {
      try {
        cell["speedup_vs_base_only"] =
            speedup(runs_of(c.scheme), runs_of(Scheme::BaseOnly));
      } catch (const std::exception&) {
      }
    }
    cells.push_back(std::move(cell));
  }
  json errors = json::array();
  for (const auto& r : out.runs) {
    if (!r.error.empty()) errors.push_back(r.error);
  }
  return {{"schema_version", kResultsSchemaVersion},
          {"seed", spec.seed},
          {"knob", to_string(sweep.knob)},
          {"values", sweep.values},
          {"repeats", sweep.repeats},
          {"problems", spec.problems.size()},
          {"cells", std::move(cells)},
          {"errors", std::move(errors)}};
}

std::string latency_accuracy_svg(const std::vector<CellResult>& cells) {
  const double W = 640, H = 420, L = 70, R = 150, T = 30, B = 60;
  double xmax = 0;
  for (const auto& c : cells) xmax = std::max(xmax, c.mean_latency_s);
  if (xmax <= 0) xmax = 1;
  xmax *= 1.1;
  auto px = [&](double x) { return L + (W - L - R) * x / xmax; };
  auto py = [&](double y) { return H - B - (H - T - B) * y; };

  std::string s = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "font-family=\"sans-serif\" font-size=\"11\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n"
      "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n"
      "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">mean latency (s)</text>\n"
      "<text x=\"15\" y=\"{}\" transform=\"rotate(-90 15 {})\" "
      "text-anchor=\"middle\">pass@1</text>\n",
      W, H, L, H - B, W - R, H - B, L, T, L, H - B, (L + W - R) / 2, H - 20,
      (T + H - B) / 2, (T + H - B) / 2);
  for (int i = 0; i <= 5; ++i) {
    double y = i / 5.0, x = xmax * i / 5.0;
    s += fmt::format(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.1f}</text>\n"
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{:.3g}</text>\n",
        L - 6, py(y) + 4, y, px(x), H - B + 16, x);
  }
  std::vector<Scheme> seen;
  for (const auto& c : cells) {
    if (std::find(seen.begin(), seen.end(), c.scheme) == seen.end()) {
      seen.push_back(c.scheme);
    }
  }
  for (std::size_t k = 0; k < seen.size(); ++k) {
    const char* colour = kPalette[k % std::size(kPalette)];
    s += fmt::format(
        "<circle cx=\"{}\" cy=\"{}\" r=\"5\" fill=\"{}\"/>"
        "<text x=\"{}\" y=\"{}\">{}</text>\n",
        W - R + 20, T + 18 * k, colour, W - R + 30, T + 18 * k + 4,
        to_string(seen[k]));
    for (const auto& c : cells) {
      if (c.scheme != seen[k] || !c.pass_at_1) continue;
      s += fmt::format(
          "<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"4\" fill=\"{}\">"
          "<title>{} {}={}</title></circle>"
          "<text x=\"{:.2f}\" y=\"{:.2f}\" fill=\"{}\">{}</text>\n",
          px(c.mean_latency_s), py(*c.pass_at_1), colour, to_string(c.scheme),
          to_string(c.knob), c.value, px(c.mean_latency_s) + 6,
          py(*c.pass_at_1) - 6, colour, c.value);
    }
  }
  s += "</svg>\n";
  return s;
}

std::string trace_file_name(Scheme scheme, Knob knob, std::int64_t value) {
  return fmt::format("{}_{}_{}.jsonl", to_string(scheme), to_string(knob), value);
}

void write_outputs(const std::filesystem::path& dir, const ExperimentSpec& spec,
                   const SweepOutput& out) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "traces");
  fs::create_directories(dir / "plots");

  std::ostringstream csv;
  write_results_csv(csv, out.cells);
  write_file(dir / "results.csv", csv.str());
  write_file(dir / "summary.json", summary_json(spec, out).dump(2) + "\n");

  std::map<std::string, std::string> traces;
  for (const auto& c : out.cells) traces[trace_file_name(c.scheme, c.knob, c.value)];
  const auto knob = spec.effective_sweep().knob;
  for (const auto& r : out.runs) {
    traces[trace_file_name(r.scheme, knob, r.value)] += r.trace_jsonl;
  }
  for (const auto& [name, text] : traces) write_file(dir / "traces" / name, text);

  std::string dat = "# scheme value mean_latency_s pass_at_1\n";
  Scheme last = out.cells.empty() ? Scheme::BaseOnly : out.cells.front().scheme;
  for (const auto& c : out.cells) {
    if (c.scheme != last) dat += "\n\n";
    last = c.scheme;
    dat += fmt::format("{} {} {} {}\n", to_string(c.scheme), c.value,
                       num(c.mean_latency_s),
                       c.pass_at_1 ? num(*c.pass_at_1) : std::string("nan"));
  }
  write_file(dir / "plots" / "latency_accuracy.dat", dat);
  write_file(dir / "plots" / "latency_accuracy.svg", latency_accuracy_svg(out.cells));
}

std::vector<CellResult> recompute_cells_from_traces(
    const std::filesystem::path& dir, const ExperimentSpec& spec) {
  const auto sweep = spec.effective_sweep();
  std::map<std::string, std::size_t> problem_index;
  for (std::size_t i = 0; i < spec.problems.size(); ++i) {
    problem_index[spec.problems[i].id] = i;
  }

  std::vector<RunRecord> runs;
  for (auto scheme : spec.schemes) {
    for (auto value : sweep.values) {
      auto path = dir / "traces" / trace_file_name(scheme, sweep.knob, value);
      std::ifstream in(path);
      if (!in) throw std::runtime_error("missing trace file " + path.string());
      std::vector<json> current;
      for (auto& rec : engine::read_jsonl(in)) {
        const bool closing = rec.at("kind") == "trajectory";
        current.push_back(std::move(rec));
        if (!closing) continue;

        const auto& fin = current.back();
        auto s = engine::summarize_trace(current);
        RunRecord r;
        r.scheme = scheme;
        r.value = value;
        r.repeat = fin.at("repeat").get<int>();
        const auto id = fin.at("problem").get<std::string>();
        r.problem = problem_index.at(id);
        RunMetrics m;
        m.problem_id = id;
        m.repeat = r.repeat;
        m.scheme = scheme;
        m.latency_s = s.latency_s;
        m.thinking_tokens = s.thinking_tokens;
        m.token_budget = s.budget;
        m.rejected_count = fin.at("rejected").get<std::size_t>();
        m.forced_steps = s.forced;
        m.score_parse_failures = fin.at("score_parse_failures").get<std::size_t>();
        m.correct = fin.at("correct").get<bool>();
        m.budget_exhausted = fin.at("budget_exhausted").get<bool>();
        if (speculates_steps(scheme) && s.steps > 0) {
          m.accepted_fraction =
              static_cast<double>(s.accepted) / static_cast<double>(s.steps);
        }
        r.metrics = std::move(m);
        runs.push_back(std::move(r));
        current.clear();
      }
    }
  }
  // Runs that failed left no trace; count them as failures again.
  std::map<std::tuple<int, std::int64_t, int, std::size_t>, bool> present;
  for (const auto& r : runs) {
    present[{static_cast<int>(r.scheme), r.value, r.repeat, r.problem}] = true;
  }
  for (auto scheme : spec.schemes) {
    for (auto value : sweep.values) {
      for (int j = 0; j < sweep.repeats; ++j) {
        for (std::size_t q = 0; q < spec.problems.size(); ++q) {
          if (!present.count({static_cast<int>(scheme), value, j, q})) {
            runs.push_back({scheme, value, j, q, std::nullopt, "no trace", {}});
          }
        }
      }
    }
  }
  return aggregate_cells(spec, runs);
}

std::string compare_results(std::istream& a, std::istream& b) {
  auto ra = read_results_csv(a);
  auto rb = read_results_csv(b);
  auto key = [](const std::map<std::string, std::string>& r) {
    return r.at("scheme") + " " + r.at("knob") + "=" + r.at("value");
  };
  std::map<std::string, const std::map<std::string, std::string>*> index;
  for (const auto& r : rb) index[key(r)] = &r;

  auto as_num = [](const std::string& s) -> std::optional<double> {
    if (s.empty()) return std::nullopt;
    return std::stod(s);
  };
  auto show = [](std::optional<double> v, const char* spec_fmt) {
    return v ? fmt::format(fmt::runtime(spec_fmt), *v) : std::string("-");
  };

  std::string out = fmt::format("{:<34} {:>9} {:>9} {:>9} {:>11} {:>11} {:>8}\n",
                                "cell", "pass@1 A", "pass@1 B", "delta",
                                "latency A", "latency B", "B/A");
  for (const auto& r : ra) {
    auto it = index.find(key(r));
    if (it == index.end()) {
      out += fmt::format("{:<34} only in A\n", key(r));
      continue;
    }
    const auto& s = *it->second;
    auto pa = as_num(r.at("pass_at_1")), pb = as_num(s.at("pass_at_1"));
    auto la = as_num(r.at("mean_latency_s")), lb = as_num(s.at("mean_latency_s"));
    std::optional<double> dp, ratio;
    if (pa && pb) dp = *pb - *pa;
    if (la && lb && *la > 0) ratio = *lb / *la;
    out += fmt::format("{:<34} {:>9} {:>9} {:>9} {:>11} {:>11} {:>8}\n", key(r),
                       show(pa, "{:.4f}"), show(pb, "{:.4f}"),
                       show(dp, "{:+.4f}"), show(la, "{:.3f}"),
                       show(lb, "{:.3f}"), show(ratio, "{:.3f}"));
    index.erase(it);
  }
  for (const auto& [k, row] : index) out += fmt::format("{:<34} only in B\n", k);
  return out;
}

}  // namespace stepspec::bench

// Copyright 2026 The stepspec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "stepspec/bench/experiment.hpp"

namespace stepspec::bench {

inline constexpr int kResultsSchemaVersion = 1;

// Fixed column order of results.csv.
const std::vector<std::string>& results_columns();

void write_results_csv(std::ostream& os, const std::vector<CellResult>& cells);

// Rows of a results.csv as column -> raw field. Throws std::runtime_error on
// a missing header, an unknown schema version or a ragged row.
std::vector<std::map<std::string, std::string>> read_results_csv(std::istream& is);

json summary_json(const ExperimentSpec& spec, const SweepOutput& out);

// Self-contained SVG scatter of mean latency against pass@1, one point per
// cell, one colour per scheme.
std::string latency_accuracy_svg(const std::vector<CellResult>& cells);

// Writes results.csv, summary.json, traces/*.jsonl and plots/ under `dir`.
void write_outputs(const std::filesystem::path& dir, const ExperimentSpec& spec,
                   const SweepOutput& out);

std::string trace_file_name(Scheme scheme, Knob knob, std::int64_t value);

// Rebuilds the per-cell table from the traces written by write_outputs.
std::vector<CellResult> recompute_cells_from_traces(
    const std::filesystem::path& dir, const ExperimentSpec& spec);

// Side-by-side table of two results.csv files, matched on
// (scheme, knob, value).
std::string compare_results(std::istream& a, std::istream& b);

}  // namespace stepspec::bench

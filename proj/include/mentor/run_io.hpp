#pragma once

#include "mentor/baselines.hpp"
#include "mentor/train.hpp"

#include <json.hpp>

#include <filesystem>
#include <vector>

namespace mentor {

/// Writes config.json, history.csv, metrics.json, confusion.csv, channel_attention.csv,
/// node_importance.csv and gini.csv into `dir`. Per-team tables cover the test teams.
/// `extra` is merged into metrics.json.
void write_run_dir(const std::filesystem::path& dir, const RunReport& report, const nlohmann::json& extra);

/// Baseline counterpart: config.json, metrics.json, confusion.csv, features.csv.
void write_baseline_dir(const std::filesystem::path& dir, const Bundle& bundle, const BaselineConfig& cfg,
                        const BaselineReport& report, const nlohmann::json& extra);

/// Aggregates run directories into ternary.csv, gini_hist.csv, confusion.csv and
/// summary.txt under `out`. Validates every input before writing anything and never
/// modifies the runs.
void write_report(const std::vector<std::filesystem::path>& runs, const std::filesystem::path& out, int gini_bins = 10);

/// "mean ± std" of percentages with one decimal, as in the paper tables.
std::string format_mean_std(const std::vector<double>& fractions);

}  // namespace mentor

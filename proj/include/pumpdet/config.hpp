#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pumpdet/detect.hpp"
#include "pumpdet/evaluate.hpp"
#include "pumpdet/gates.hpp"
#include "pumpdet/report.hpp"
#include "pumpdet/synth.hpp"

namespace pumpdet {

struct ConfigEntry {
    std::string key;
    std::string value;
    std::size_t line = 0;
};

struct ConfigSection {
    std::string name;  // "" for the top level
    std::size_t line = 0;
    std::vector<ConfigEntry> entries;
};

/// Plain `key = value` lines, `#` comments, and `[name]` headers that open a
/// new section (a repeated header opens another section of that name).
/// Values may be double-quoted. Throws Error{InvalidArgument} with the line.
std::vector<ConfigSection> parse_key_values(const std::string& text);

struct RunConfig {
    std::filesystem::path data_dir = "data";
    std::vector<std::string> symbols;  // empty means every stored symbol
    std::vector<int> settings = {1, 2, 3, 4, 5};
    std::vector<EligibilityRule> rules = default_rules();
    int lag_hours = 12;
    int window_days = 30;
    int cluster_gap_hours = 3;
    MatchConfig match;
    std::vector<ReportFormat> formats = {ReportFormat::Markdown, ReportFormat::Csv,
                                         ReportFormat::Json};
    std::filesystem::path output_dir = "reports";
    std::optional<std::filesystem::path> truth;
    unsigned jobs = 1;

    /// Presets for `settings`, with lag_hours applied.
    std::vector<ThresholdSetting> threshold_settings() const;
    void validate() const;
};

/// Top-level keys: data_dir, symbols ("all" or a comma list), settings,
/// rules (shorthand "total, avg_daily, ewma:10, ewma_volatility:10:2"),
/// lag_hours, window_days, cluster_gap, pre_tolerance, post_tolerance,
/// formats, output_dir, truth, jobs. Each [rule] section replaces the
/// shorthand list and takes kind, frac_primary, frac_max, d_span, alpha.
/// Relative paths resolve against `base_dir`.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// "ewma:20", "ewma_volatility:10:2", "total" ...
EligibilityRule parse_rule_shorthand(const std::string& text);

/// Scenario file. With explicit `pump_times` a single scenario named
/// `symbol` is produced; otherwise `symbols` scenarios with
/// `pumps_per_symbol` evenly placed pumps each.
struct SynthConfig {
    CorpusSpec corpus;
    bool single = false;
};
SynthConfig parse_synth_config(const std::string& text);

std::vector<std::string> split_list(const std::string& text);

}  // namespace pumpdet

#include "pumpdet/config.hpp"

#include <charconv>

#include "pumpdet/csv.hpp"
#include "pumpdet/error.hpp"

namespace pumpdet {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad(const std::string& msg, std::size_t line) {
    throw Error(ErrorCode::InvalidArgument, msg, line);
}

std::string unquote(std::string v) {
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
    return v;
}

int to_int(const ConfigEntry& e) {
    int out = 0;
    const auto& s = e.value;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        bad("'" + e.key + "' expects an integer, got '" + s + "'", e.line);
    }
    return out;
}

std::uint64_t to_u64(const ConfigEntry& e) {
    std::uint64_t out = 0;
    const auto& s = e.value;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        bad("'" + e.key + "' expects a non-negative integer, got '" + s + "'", e.line);
    }
    return out;
}

double to_double(const ConfigEntry& e) {
    const auto v = csv::parse_double(e.value);
    if (!v) bad("'" + e.key + "' expects a number, got '" + e.value + "'", e.line);
    return *v;
}

fs::path to_path(const ConfigEntry& e, const fs::path& base) {
    fs::path p(e.value);
    return p.is_relative() && !base.empty() ? base / p : p;
}

EligibilityRule parse_rule_section(const ConfigSection& section) {
    std::optional<GateKind> kind;
    for (const auto& e : section.entries) {
        if (e.key == "kind") {
            kind = parse_gate_kind(e.value);
            if (!kind) bad("unknown rule kind '" + e.value + "'", e.line);
        }
    }
    if (!kind) bad("[rule] section without 'kind'", section.line);
    EligibilityRule rule = EligibilityRule::defaults(*kind);
    for (const auto& e : section.entries) {
        if (e.key == "kind") continue;
        if (e.key == "frac_primary") {
            rule.frac_primary = to_double(e);
        } else if (e.key == "frac_max") {
            rule.frac_max = to_double(e);
        } else if (e.key == "d_span") {
            rule.d_span = to_int(e);
        } else if (e.key == "alpha") {
            rule.alpha = to_double(e);
        } else {
            bad("unknown [rule] key '" + e.key + "'", e.line);
        }
    }
    try {
        rule.validate();
    } catch (const Error& err) {
        bad(err.message(), section.line);
    }
    return rule;
}

}  // namespace

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text + ",") {
        if (ch == ',') {
            auto item = csv::trim(cur);
            if (!item.empty()) out.push_back(std::move(item));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    return out;
}

std::vector<ConfigSection> parse_key_values(const std::string& text) {
    std::vector<ConfigSection> sections(1);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        bool in_quote = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_quote = !in_quote;
            if (line[i] == '#' && !in_quote) {
                line.resize(i);
                break;
            }
        }
        line = csv::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') bad("unterminated section header", line_no);
            sections.push_back({csv::trim(line.substr(1, line.size() - 2)), line_no, {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) bad("expected 'key = value'", line_no);
        const std::string key = csv::trim(line.substr(0, eq));
        if (key.empty()) bad("empty key", line_no);
        sections.back().entries.push_back({key, unquote(csv::trim(line.substr(eq + 1))), line_no});
    }
    return sections;
}

EligibilityRule parse_rule_shorthand(const std::string& text) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : text + ":") {
        if (ch == ':') {
            parts.push_back(csv::trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    const auto kind = parse_gate_kind(parts[0]);
    if (!kind) throw Error(ErrorCode::InvalidArgument, "unknown rule kind '" + parts[0] + "'");
    EligibilityRule rule = EligibilityRule::defaults(*kind);
    if (parts.size() > 3) throw Error(ErrorCode::InvalidArgument, "too many fields in '" + text + "'");
    if (parts.size() >= 2) {
        int d = 0;
        const auto [p, ec] = std::from_chars(parts[1].data(), parts[1].data() + parts[1].size(), d);
        if (ec != std::errc() || p != parts[1].data() + parts[1].size()) {
            throw Error(ErrorCode::InvalidArgument, "bad d_span in '" + text + "'");
        }
        rule.d_span = d;
    }
    if (parts.size() == 3) {
        const auto a = csv::parse_double(parts[2]);
        if (!a) throw Error(ErrorCode::InvalidArgument, "bad alpha in '" + text + "'");
        rule.alpha = *a;
    }
    rule.validate();
    return rule;
}

std::vector<ThresholdSetting> RunConfig::threshold_settings() const {
    std::vector<ThresholdSetting> out;
    for (int id : settings) {
        auto s = ThresholdSetting::preset(id);
        s.lag_hours = lag_hours;
        out.push_back(s);
    }
    return out;
}

void RunConfig::validate() const {
    if (settings.empty()) throw Error(ErrorCode::InvalidArgument, "no threshold settings selected");
    for (int id : settings) ThresholdSetting::preset(id);
    if (rules.empty()) throw Error(ErrorCode::InvalidArgument, "no rules selected");
    for (const auto& r : rules) r.validate();
    if (lag_hours < 1) throw Error(ErrorCode::InvalidArgument, "lag_hours must be >= 1");
    if (window_days < 1) throw Error(ErrorCode::InvalidArgument, "window_days must be >= 1");
    if (cluster_gap_hours < 0) throw Error(ErrorCode::InvalidArgument, "cluster_gap must be >= 0");
    match.validate();
    if (formats.empty()) throw Error(ErrorCode::InvalidArgument, "no output formats");
    if (jobs < 1) throw Error(ErrorCode::InvalidArgument, "jobs must be >= 1");
}

RunConfig parse_run_config(const std::string& text, const fs::path& base_dir) {
    RunConfig cfg;
    const auto sections = parse_key_values(text);
    for (const auto& e : sections.front().entries) {
        if (e.key == "data_dir") {
            cfg.data_dir = to_path(e, base_dir);
        } else if (e.key == "symbols") {
            cfg.symbols.clear();
            if (e.value != "all") cfg.symbols = split_list(e.value);
        } else if (e.key == "settings") {
            cfg.settings.clear();
            for (const auto& item : split_list(e.value)) {
                cfg.settings.push_back(to_int({e.key, item, e.line}));
            }
        } else if (e.key == "rules") {
            cfg.rules.clear();
            for (const auto& item : split_list(e.value)) {
                try {
                    cfg.rules.push_back(parse_rule_shorthand(item));
                } catch (const Error& err) {
                    bad(err.message(), e.line);
                }
            }
        } else if (e.key == "lag_hours") {
            cfg.lag_hours = to_int(e);
        } else if (e.key == "window_days") {
            cfg.window_days = to_int(e);
        } else if (e.key == "cluster_gap") {
            cfg.cluster_gap_hours = to_int(e);
        } else if (e.key == "pre_tolerance") {
            cfg.match.pre_tolerance_hours = to_int(e);
        } else if (e.key == "post_tolerance") {
            cfg.match.post_tolerance_hours = to_int(e);
        } else if (e.key == "formats") {
            cfg.formats.clear();
            for (const auto& item : split_list(e.value)) {
                const auto f = parse_report_format(item);
                if (!f) bad("unknown format '" + item + "'", e.line);
                cfg.formats.push_back(*f);
            }
        } else if (e.key == "output_dir") {
            cfg.output_dir = to_path(e, base_dir);
        } else if (e.key == "truth") {
            cfg.truth = to_path(e, base_dir);
        } else if (e.key == "jobs") {
            const int j = to_int(e);
            if (j < 1) bad("jobs must be >= 1", e.line);
            cfg.jobs = static_cast<unsigned>(j);
        } else {
            bad("unknown key '" + e.key + "'", e.line);
        }
    }

    bool rules_from_sections = false;
    for (std::size_t i = 1; i < sections.size(); ++i) {
        if (sections[i].name != "rule") bad("unknown section [" + sections[i].name + "]", sections[i].line);
        if (!rules_from_sections) cfg.rules.clear();
        rules_from_sections = true;
        cfg.rules.push_back(parse_rule_section(sections[i]));
    }

    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const fs::path& path) {
    const std::string text = csv::read_file(path);
    return parse_run_config(text, path.parent_path());
}

SynthConfig parse_synth_config(const std::string& text) {
    SynthConfig cfg;
    auto& corpus = cfg.corpus;
    auto& s = corpus.base;
    const auto sections = parse_key_values(text);
    if (sections.size() > 1) bad("scenario files take no sections", sections[1].line);
    for (const auto& e : sections.front().entries) {
        if (e.key == "symbol") {
            s.symbol = e.value;
        } else if (e.key == "symbols") {
            corpus.symbols = to_int(e);
        } else if (e.key == "prefix") {
            corpus.prefix = e.value;
        } else if (e.key == "suffix") {
            corpus.suffix = e.value;
        } else if (e.key == "seed") {
            s.seed = to_u64(e);
        } else if (e.key == "profile") {
            const auto p = parse_profile(e.value);
            if (!p) bad("unknown profile '" + e.value + "'", e.line);
            s.profile = *p;
        } else if (e.key == "start") {
            const auto t = parse_rfc3339(e.value);
            if (!t) bad("bad start time '" + e.value + "'", e.line);
            s.start = *t;
        } else if (e.key == "span_days") {
            s.span_days = to_int(e);
        } else if (e.key == "base_price") {
            s.base_price = to_double(e);
        } else if (e.key == "base_hourly_volume") {
            s.base_hourly_volume = to_double(e);
        } else if (e.key == "pump_times") {
            cfg.single = true;
            s.pump_times.clear();
            for (const auto& item : split_list(e.value)) {
                const auto t = parse_rfc3339(item);
                if (!t) bad("bad pump time '" + item + "'", e.line);
                s.pump_times.push_back(*t);
            }
        } else if (e.key == "pumps_per_symbol") {
            corpus.pumps_per_symbol = to_int(e);
        } else if (e.key == "first_pump_hour") {
            corpus.first_pump_hour = to_int(e);
        } else if (e.key == "pump_spacing_hours") {
            corpus.pump_spacing_hours = to_int(e);
        } else if (e.key == "pump_price_mult") {
            s.pump_price_mult = to_double(e);
        } else if (e.key == "pump_volume_mult") {
            s.pump_volume_mult = to_double(e);
        } else if (e.key == "blip_interval_hours") {
            s.blip_interval_hours = to_int(e);
        } else if (e.key == "blip_volume") {
            s.blip_volume = to_double(e);
        } else if (e.key == "volume_log_sigma") {
            s.volume_log_sigma = to_double(e);
        } else if (e.key == "price_noise") {
            s.price_noise = to_double(e);
        } else {
            bad("unknown key '" + e.key + "'", e.line);
        }
    }
    return cfg;
}

}  // namespace pumpdet

#include "pumpdet/cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>

#include "pumpdet/config.hpp"
#include "pumpdet/csv.hpp"
#include "pumpdet/error.hpp"
#include "pumpdet/evaluate.hpp"
#include "pumpdet/http_transport.hpp"
#include "pumpdet/ingestion.hpp"
#include "pumpdet/report.hpp"
#include "pumpdet/synth.hpp"

namespace pumpdet::cli {

namespace fs = std::filesystem;

namespace {

// Options shared by detect / sweep / evaluate. Unset flags fall back to the
// config file, then to built-in defaults.
struct RunFlags {
    std::string config;
    std::string data_dir;
    std::vector<std::string> symbols;
    std::vector<int> settings;
    std::vector<std::string> rules;
    std::optional<int> d_span;
    std::optional<double> alpha;
    std::optional<int> lag_hours;
    std::optional<int> window_days;
    std::optional<int> cluster_gap;
    std::optional<int> pre_tolerance;
    std::optional<int> post_tolerance;
    std::string truth;
    std::optional<unsigned> jobs;
    std::vector<std::string> formats;
    std::string out_dir;
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool multi) {
    cmd->add_option("--config", f.config, "Run-config file");
    cmd->add_option("--data-dir", f.data_dir, "Directory of <symbol>.csv candle files");
    if (multi) {
        cmd->add_option("--symbol", f.symbols, "Symbols to process (default: all stored)");
        cmd->add_option("--setting", f.settings, "Threshold settings 1..5");
        cmd->add_option("--rule", f.rules,
                        "Gate kinds: total, avg_daily, ewma[:d], ewma_volatility[:d[:alpha]]");
    }
    cmd->add_option("--d-span", f.d_span, "EWMA span in days for EWMA gates");
    cmd->add_option("--alpha", f.alpha, "Volatility multiplier for ewma_volatility");
    cmd->add_option("--lag-hours", f.lag_hours, "SMA baseline length in hours");
    cmd->add_option("--window-days", f.window_days, "Trailing window for V_tot / V_max");
    cmd->add_option("--cluster-gap", f.cluster_gap, "Max hours between flags of one event");
    cmd->add_option("--pre-tolerance", f.pre_tolerance, "Hours before an announcement that match");
    cmd->add_option("--post-tolerance", f.post_tolerance, "Hours after an announcement that match");
    cmd->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

RunConfig resolve_config(const RunFlags& f) {
    RunConfig cfg = f.config.empty() ? RunConfig{} : load_run_config(f.config);
    if (!f.data_dir.empty()) cfg.data_dir = f.data_dir;
    if (!f.symbols.empty()) cfg.symbols = f.symbols;
    if (!f.settings.empty()) cfg.settings = f.settings;
    if (!f.rules.empty()) {
        cfg.rules.clear();
        for (const auto& r : f.rules) cfg.rules.push_back(parse_rule_shorthand(r));
    }
    for (auto& r : cfg.rules) {
        if (f.d_span && r.uses_ewma()) r.d_span = *f.d_span;
        if (f.alpha && r.kind == GateKind::EwmaVolatility) r.alpha = *f.alpha;
    }
    if (f.lag_hours) cfg.lag_hours = *f.lag_hours;
    if (f.window_days) cfg.window_days = *f.window_days;
    if (f.cluster_gap) cfg.cluster_gap_hours = *f.cluster_gap;
    if (f.pre_tolerance) cfg.match.pre_tolerance_hours = *f.pre_tolerance;
    if (f.post_tolerance) cfg.match.post_tolerance_hours = *f.post_tolerance;
    if (!f.truth.empty()) cfg.truth = f.truth;
    if (f.jobs) cfg.jobs = *f.jobs;
    if (!f.formats.empty()) {
        cfg.formats.clear();
        for (const auto& s : f.formats) {
            const auto fmt = parse_report_format(s);
            if (!fmt) throw Error(ErrorCode::InvalidArgument, "unknown format '" + s + "'");
            cfg.formats.push_back(*fmt);
        }
    }
    if (!f.out_dir.empty()) cfg.output_dir = f.out_dir;
    cfg.validate();
    return cfg;
}

std::vector<SymbolSeries> load_dataset(const RunConfig& cfg) {
    const auto symbols = cfg.symbols.empty() ? list_stored_symbols(cfg.data_dir) : cfg.symbols;
    if (symbols.empty()) {
        throw Error(ErrorCode::EmptyDataset, "no candle files in " + cfg.data_dir.string());
    }
    std::vector<SymbolSeries> dataset(symbols.size());
    parallel_for(symbols.size(), cfg.jobs,
                 [&](std::size_t i) { dataset[i] = load_series(cfg.data_dir, symbols[i]); });
    return dataset;
}

std::string optional_number(const std::optional<double>& v) {
    return v ? csv::format_double(*v) : std::string();
}

std::string flags_csv(const std::vector<AnomalyFlag>& flags) {
    std::string out = "timestamp,eligible,volume_anomaly,price_anomaly,combined,price_ratio,volume_ratio\n";
    for (const auto& f : flags) {
        out += format_rfc3339(f.timestamp) + ',' + (f.eligible ? '1' : '0') + ',' +
               (f.volume_anomaly ? '1' : '0') + ',' + (f.price_anomaly ? '1' : '0') + ',' +
               (f.combined ? '1' : '0') + ',' + optional_number(f.price_ratio) + ',' +
               optional_number(f.volume_ratio) + '\n';
    }
    return out;
}

std::string series_csv(const SymbolSeries& s, const std::vector<RollingContext>& ctx) {
    std::string out =
        "timestamp,open,high,low,close,volume,synthetic,sma_open,sma_volume,v_tot,v_max,"
        "v_avg_daily,ewma_daily,sigma_daily,complete_days\n";
    for (std::size_t i = 0; i < s.candles.size(); ++i) {
        const auto& c = s.candles[i];
        const auto& x = ctx[i];
        out += format_rfc3339(c.timestamp);
        for (double v : {c.open, c.high, c.low, c.close, c.volume}) out += ',' + csv::format_double(v);
        out += c.synthetic ? ",1" : ",0";
        for (double v : {x.sma_open, x.sma_volume, x.v_tot, x.v_max, x.v_avg_daily, x.ewma_daily,
                         x.sigma_daily}) {
            out += ',' + csv::format_double(v);
        }
        out += ',' + std::to_string(x.complete_days) + '\n';
    }
    return out;
}

std::string events_csv(const std::vector<DetectedEvent>& events) {
    std::string out = "symbol,start,end,peak_time,peak_volume,max_price_ratio,max_volume_ratio,candles\n";
    for (const auto& e : events) {
        out += csv::escape(e.symbol) + ',' + format_rfc3339(e.start) + ',' + format_rfc3339(e.end) +
               ',' + format_rfc3339(e.peak_time) + ',' + csv::format_double(e.peak_volume) + ',' +
               optional_number(e.max_price_ratio) + ',' + optional_number(e.max_volume_ratio) + ',' +
               std::to_string(e.candle_count) + '\n';
    }
    return out;
}

void write_output(const std::string& target, const std::string& content, std::ostream& out) {
    if (target == "-") {
        out << content;
    } else {
        csv::write_file_atomic(target, content);
    }
}

void write_reports(const std::vector<EvalReport>& reports, const RunConfig& cfg, std::ostream& out) {
    for (auto fmt : cfg.formats) {
        const fs::path path = cfg.output_dir / ("report." + std::string(file_extension(fmt)));
        csv::write_file_atomic(path, render_report(reports, fmt));
    }
    out << render_report(reports, ReportFormat::Markdown);
}

Timestamp parse_time_flag(const std::string& text, const char* name) {
    if (auto t = parse_rfc3339(text)) return *t;
    // Bare dates are accepted as midnight UTC.
    if (auto t = parse_rfc3339(text + "T00:00:00Z")) return *t;
    throw Error(ErrorCode::InvalidArgument, std::string(name) + ": bad time '" + text + "'");
}

int exit_code_for(const Error& e) {
    switch (e.code()) {
        case ErrorCode::InvalidArgument:
        case ErrorCode::InvalidSpec: return kExitUsage;
        default: return kExitOperational;
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const Environment& env) {
    SystemClock system_clock;
    Clock& clock = env.clock ? *env.clock : system_clock;
    const auto make_transport = [&](const std::string& base) -> std::unique_ptr<Transport> {
        if (env.make_transport) return env.make_transport(base);
        return std::make_unique<HttpTransport>(base);
    };

    CLI::App app{"Pump-and-dump detection on hourly OHLCV candles"};
    app.name(args.empty() ? "pumpdet" : args[0]);
    app.require_subcommand(1);

    // markets
    auto* markets = app.add_subcommand("markets", "List the exchange's trading pairs");
    std::string base_url;
    std::string markets_out = "-";
    int max_retries = 5;
    double max_rps = 3.0;
    markets->add_option("--base-url", base_url, "API base URL (default $PUMPDET_BASE_URL)");
    markets->add_option("--out", markets_out, "Output file, '-' for stdout");
    markets->add_option("--max-rps", max_rps, "Request rate limit")->check(CLI::PositiveNumber);
    markets->add_option("--max-retries", max_retries, "Retries on 429/5xx")->check(CLI::NonNegativeNumber);

    // fetch
    auto* fetch = app.add_subcommand("fetch", "Download hourly candles into the data directory");
    std::vector<std::string> fetch_symbols;
    bool fetch_all = false;
    std::string fetch_start, fetch_end, fetch_dir = "data";
    int chunk_size = 480;
    unsigned fetch_jobs = 1;
    fetch->add_option("--symbol", fetch_symbols, "Symbols to download");
    fetch->add_flag("--all", fetch_all, "Download every listed market");
    fetch->add_option("--start", fetch_start, "Inclusive start (RFC3339 or YYYY-MM-DD)")->required();
    fetch->add_option("--end", fetch_end, "Exclusive end (RFC3339 or YYYY-MM-DD)")->required();
    fetch->add_option("--data-dir", fetch_dir, "Output directory");
    fetch->add_option("--chunk-size", chunk_size, "Max candles per request")->check(CLI::PositiveNumber);
    fetch->add_option("--max-rps", max_rps, "Request rate limit shared by all workers")
        ->check(CLI::PositiveNumber);
    fetch->add_option("--max-retries", max_retries, "Retries on 429/5xx")->check(CLI::NonNegativeNumber);
    fetch->add_option("--base-url", base_url, "API base URL (default $PUMPDET_BASE_URL)");
    fetch->add_option("--jobs", fetch_jobs, "Concurrent downloads")->check(CLI::PositiveNumber);

    // detect
    auto* detect = app.add_subcommand("detect", "Flag one symbol under one setting and rule");
    RunFlags detect_flags;
    std::string detect_symbol;
    int detect_setting = 4;
    std::string detect_rule = "ewma";
    std::string emit_flags, emit_series, emit_events = "-";
    add_run_flags(detect, detect_flags, false);
    detect->add_option("--symbol", detect_symbol, "Symbol to analyse")->required();
    detect->add_option("--setting", detect_setting, "Threshold setting 1..5");
    detect->add_option("--rule", detect_rule, "Gate kind (see sweep --help)");
    detect->add_option("--emit-flags", emit_flags, "Write per-candle flags CSV");
    detect->add_option("--emit-series", emit_series, "Write candles with rolling statistics CSV");
    detect->add_option("--emit-events", emit_events, "Write detected events CSV ('-' = stdout)");

    // sweep / evaluate
    RunFlags sweep_flags;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run the settings x rules grid and write reports");
    add_run_flags(sweep_cmd, sweep_flags, true);
    sweep_cmd->add_option("--truth", sweep_flags.truth, "Ground-truth CSV");
    sweep_cmd->add_option("--format", sweep_flags.formats, "markdown, csv, json");
    sweep_cmd->add_option("--out-dir", sweep_flags.out_dir, "Report directory");

    RunFlags eval_flags;
    auto* evaluate = app.add_subcommand("evaluate", "Score detections against ground truth");
    add_run_flags(evaluate, eval_flags, true);
    evaluate->add_option("--truth", eval_flags.truth, "Ground-truth CSV");
    evaluate->add_option("--format", eval_flags.formats, "markdown, csv, json");
    evaluate->add_option("--out-dir", eval_flags.out_dir, "Report directory");

    // report
    auto* report = app.add_subcommand("report", "Re-render a report.json");
    std::string report_in, report_out = "-", report_format = "markdown";
    report->add_option("--input", report_in, "report.json from sweep/evaluate")->required();
    report->add_option("--format", report_format, "markdown, csv, json");
    report->add_option("--out", report_out, "Output file, '-' for stdout");

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with ground truth");
    std::string synth_config, synth_dir = "data", synth_profile;
    std::optional<int> synth_symbols, synth_pumps, synth_span;
    std::optional<std::uint64_t> synth_seed;
    synth->add_option("--config", synth_config, "Scenario file");
    synth->add_option("--out-dir", synth_dir, "Where <symbol>.csv and truth.csv go");
    synth->add_option("--profile", synth_profile, "dormant, blippy or regular");
    synth->add_option("--symbols", synth_symbols, "Number of symbols")->check(CLI::PositiveNumber);
    synth->add_option("--pumps-per-symbol", synth_pumps, "Pumps per symbol")
        ->check(CLI::NonNegativeNumber);
    synth->add_option("--span-days", synth_span, "Days per series")->check(CLI::PositiveNumber);
    synth->add_option("--seed", synth_seed, "RNG seed");

    std::vector<char*> argv;
    std::vector<std::string> storage = args.empty() ? std::vector<std::string>{"pumpdet"} : args;
    for (auto& a : storage) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        for (auto* sub : app.get_subcommands()) err << sub->help();
        return kExitUsage;
    }

    try {
        if (markets->parsed()) {
            const std::string base = base_url.empty() ? resolve_base_url() : base_url;
            auto transport = make_transport(base);
            auto limiter = std::make_shared<RateLimiter>(max_rps, clock);
            ExchangeClient client(*transport, clock, limiter);
            std::string text;
            for (const auto& m : client.list_markets(max_retries)) text += m + '\n';
            write_output(markets_out, text, out);
            return kExitOk;
        }

        if (fetch->parsed()) {
            if (fetch_all == !fetch_symbols.empty()) {
                throw Error(ErrorCode::InvalidArgument, "give either --symbol or --all");
            }
            const std::string base = base_url.empty() ? resolve_base_url() : base_url;
            auto limiter = std::make_shared<RateLimiter>(max_rps, clock);
            FetchPlan templ;
            templ.start = parse_time_flag(fetch_start, "--start");
            templ.end = parse_time_flag(fetch_end, "--end");
            templ.chunk_size = chunk_size;
            templ.max_rps = max_rps;
            templ.max_retries = max_retries;

            std::vector<std::string> symbols = fetch_symbols;
            if (fetch_all) {
                auto transport = make_transport(base);
                ExchangeClient client(*transport, clock, limiter);
                symbols = client.list_markets(max_retries);
            }
            for (const auto& s : symbols) {
                FetchPlan p = templ;
                p.symbol = s;
                p.validate();
            }

            std::mutex log_mutex;
            std::atomic<int> failures{0};
            parallel_for(symbols.size(), fetch_jobs, [&](std::size_t i) {
                auto transport = make_transport(base);
                BackoffPolicy backoff;
                backoff.seed += i;
                ExchangeClient client(*transport, clock, limiter, backoff);
                FetchPlan plan = templ;
                plan.symbol = symbols[i];
                try {
                    store_series(client.fetch_candles(plan), fetch_dir);
                    std::lock_guard lock(log_mutex);
                    out << symbols[i] << ": ok\n";
                } catch (const PartialDataError& e) {
                    if (!e.received().candles.empty()) store_series(e.received(), fetch_dir);
                    std::lock_guard lock(log_mutex);
                    err << "warning: " << e.what() << "\n";
                } catch (const Error& e) {
                    ++failures;
                    std::lock_guard lock(log_mutex);
                    err << "error: " << symbols[i] << ": " << e.what() << "\n";
                }
            });
            return failures > 0 ? kExitOperational : kExitOk;
        }

        if (detect->parsed()) {
            RunFlags f = detect_flags;
            f.settings = {detect_setting};
            f.rules = {detect_rule};
            f.symbols = {detect_symbol};
            const RunConfig cfg = resolve_config(f);
            const auto series = load_series(cfg.data_dir, detect_symbol);
            const auto setting = cfg.threshold_settings().front();
            const auto& rule = cfg.rules.front();
            const auto contexts =
                build_contexts(series, RollingParams{setting.lag_hours, rule.d_span, cfg.window_days});
            const auto flags = detect_series(series, contexts, setting, rule);
            if (!emit_flags.empty()) write_output(emit_flags, flags_csv(flags), out);
            if (!emit_series.empty()) write_output(emit_series, series_csv(series, contexts), out);
            if (!emit_events.empty()) {
                write_output(emit_events,
                             events_csv(cluster_events(flags, series.symbol, cfg.cluster_gap_hours)),
                             out);
            }
            return kExitOk;
        }

        if (sweep_cmd->parsed() || evaluate->parsed()) {
            const bool is_eval = evaluate->parsed();
            RunFlags f = is_eval ? eval_flags : sweep_flags;
            if (is_eval && f.config.empty()) {
                if (f.settings.empty()) f.settings = {4};
                if (f.rules.empty()) f.rules = {"ewma_volatility"};
            }
            const RunConfig cfg = resolve_config(f);
            if (is_eval && !cfg.truth) {
                throw Error(ErrorCode::InvalidArgument, "evaluate needs --truth or truth in config");
            }
            const auto dataset = load_dataset(cfg);
            std::vector<GroundTruthEvent> truth;
            if (cfg.truth) truth = load_ground_truth(*cfg.truth);
            const auto settings = cfg.threshold_settings();
            SweepOptions opts{cfg.window_days, cfg.cluster_gap_hours, cfg.match, cfg.jobs};
            const auto reports = sweep(dataset, settings, cfg.rules, truth, opts);
            write_reports(reports, cfg, out);
            return kExitOk;
        }

        if (report->parsed()) {
            const auto fmt = parse_report_format(report_format);
            if (!fmt) throw Error(ErrorCode::InvalidArgument, "unknown format '" + report_format + "'");
            const auto reports = parse_report_json(csv::read_file(report_in));
            write_output(report_out, render_report(reports, *fmt), out);
            return kExitOk;
        }

        if (synth->parsed()) {
            SynthConfig cfg;
            if (!synth_config.empty()) cfg = parse_synth_config(csv::read_file(synth_config));
            auto& corpus = cfg.corpus;
            if (!synth_profile.empty()) {
                const auto p = parse_profile(synth_profile);
                if (!p) throw Error(ErrorCode::InvalidArgument, "unknown profile '" + synth_profile + "'");
                corpus.base.profile = *p;
            }
            if (synth_symbols) corpus.symbols = *synth_symbols;
            if (synth_pumps) corpus.pumps_per_symbol = *synth_pumps;
            if (synth_span) corpus.base.span_days = *synth_span;
            if (synth_seed) corpus.base.seed = *synth_seed;

            std::vector<Scenario> scenarios;
            if (cfg.single) {
                scenarios.push_back(generate(corpus.base));
            } else {
                scenarios = generate_corpus(corpus);
            }
            std::vector<GroundTruthEvent> truth;
            for (const auto& s : scenarios) {
                store_series(s.series, synth_dir);
                truth.insert(truth.end(), s.truth.begin(), s.truth.end());
            }
            std::stable_sort(truth.begin(), truth.end(), [](const auto& a, const auto& b) {
                return a.announce_time < b.announce_time;
            });
            store_ground_truth(truth, fs::path(synth_dir) / "truth.csv");
            out << "wrote " << scenarios.size() << " series and " << truth.size()
                << " truth events to " << synth_dir << "\n";
            return kExitOk;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitOperational;
    }
    return kExitUsage;
}

}  // namespace pumpdet::cli

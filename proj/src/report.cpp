#include "pumpdet/report.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <tuple>

#include <json.hpp>

#include "pumpdet/csv.hpp"
#include "pumpdet/error.hpp"

namespace pumpdet {

using ordered_json = nlohmann::ordered_json;

std::optional<ReportFormat> parse_report_format(std::string_view text) {
    std::string key;
    for (char ch : text) key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    if (key == "markdown" || key == "md") return ReportFormat::Markdown;
    if (key == "csv") return ReportFormat::Csv;
    if (key == "json") return ReportFormat::Json;
    return std::nullopt;
}

std::string_view file_extension(ReportFormat format) {
    switch (format) {
        case ReportFormat::Markdown: return "md";
        case ReportFormat::Csv: return "csv";
        case ReportFormat::Json: return "json";
    }
    return "txt";
}

namespace {

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

auto rule_key(const EvalReport& r) { return std::make_tuple(r.rule_kind, r.d_span, r.alpha); }

std::string render_markdown(std::span<const EvalReport> reports) {
    std::vector<const EvalReport*> rows;
    for (const auto& r : reports) rows.push_back(&r);
    std::stable_sort(rows.begin(), rows.end(), [](const EvalReport* a, const EvalReport* b) {
        return rule_key(*a) < rule_key(*b);
    });

    std::string out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const EvalReport& r = *rows[i];
        if (i == 0 || rule_key(*rows[i - 1]) != rule_key(r)) {
            if (i != 0) out += '\n';
            out += "### " + r.rule_label + "\n\n";
            out += "| Thresholds | Vol Ano. | Price Ano. | Combined Ano. | True Pos. | Missed "
                   "| FP Events | Precision | Recall | F1 |\n";
            out += "|---|---|---|---|---|---|---|---|---|---|\n";
        }
        out += "| Setting " + std::to_string(r.setting_id) + " | " +
               std::to_string(r.vol_anomaly_count) + " | " + std::to_string(r.price_anomaly_count) +
               " | " + std::to_string(r.combined_count) + " | " + std::to_string(r.true_positives) +
               " | " + std::to_string(r.missed_events) + " | " +
               std::to_string(r.false_positive_events) + " | " + fixed4(r.precision) + " | " +
               fixed4(r.recall) + " | " + fixed4(r.f1) + " |\n";
    }
    return out;
}

std::string render_csv(std::span<const EvalReport> reports) {
    std::string out =
        "setting_id,rule_kind,d_span,alpha,rule_label,vol_anomaly_count,raw_vol_anomaly_count,"
        "price_anomaly_count,combined_count,detected_events,true_positives,missed_events,"
        "false_positive_events,precision,recall,f1\n";
    for (const auto& r : reports) {
        out += std::to_string(r.setting_id) + ',' + std::string(to_string(r.rule_kind)) + ',' +
               std::to_string(r.d_span) + ',' + csv::format_double(r.alpha) + ',' +
               csv::escape(r.rule_label) + ',' + std::to_string(r.vol_anomaly_count) + ',' +
               std::to_string(r.raw_vol_anomaly_count) + ',' +
               std::to_string(r.price_anomaly_count) + ',' + std::to_string(r.combined_count) +
               ',' + std::to_string(r.detected_events) + ',' + std::to_string(r.true_positives) +
               ',' + std::to_string(r.missed_events) + ',' +
               std::to_string(r.false_positive_events) + ',' + csv::format_double(r.precision) +
               ',' + csv::format_double(r.recall) + ',' + csv::format_double(r.f1) + '\n';
    }
    return out;
}

std::string render_json(std::span<const EvalReport> reports) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : reports) {
        arr.push_back({
            {"setting_id", r.setting_id},
            {"rule_kind", std::string(to_string(r.rule_kind))},
            {"d_span", r.d_span},
            {"alpha", r.alpha},
            {"rule_label", r.rule_label},
            {"vol_anomaly_count", r.vol_anomaly_count},
            {"raw_vol_anomaly_count", r.raw_vol_anomaly_count},
            {"price_anomaly_count", r.price_anomaly_count},
            {"combined_count", r.combined_count},
            {"detected_events", r.detected_events},
            {"true_positives", r.true_positives},
            {"missed_events", r.missed_events},
            {"false_positive_events", r.false_positive_events},
            {"precision", r.precision},
            {"recall", r.recall},
            {"f1", r.f1},
        });
    }
    return arr.dump(2) + '\n';
}

}  // namespace

std::string render_report(std::span<const EvalReport> reports, ReportFormat format) {
    switch (format) {
        case ReportFormat::Markdown: return render_markdown(reports);
        case ReportFormat::Csv: return render_csv(reports);
        case ReportFormat::Json: return render_json(reports);
    }
    return {};
}

std::vector<EvalReport> parse_report_json(const std::string& text) {
    try {
        const auto doc = nlohmann::json::parse(text);
        if (!doc.is_array()) throw Error(ErrorCode::DecodeError, "report JSON is not an array");
        std::vector<EvalReport> out;
        for (const auto& o : doc) {
            EvalReport r;
            r.setting_id = o.at("setting_id").get<int>();
            const auto kind = parse_gate_kind(o.at("rule_kind").get<std::string>());
            if (!kind) throw Error(ErrorCode::DecodeError, "unknown rule_kind");
            r.rule_kind = *kind;
            r.d_span = o.at("d_span").get<int>();
            r.alpha = o.at("alpha").get<double>();
            r.rule_label = o.at("rule_label").get<std::string>();
            r.vol_anomaly_count = o.at("vol_anomaly_count").get<std::int64_t>();
            r.raw_vol_anomaly_count = o.at("raw_vol_anomaly_count").get<std::int64_t>();
            r.price_anomaly_count = o.at("price_anomaly_count").get<std::int64_t>();
            r.combined_count = o.at("combined_count").get<std::int64_t>();
            r.detected_events = o.at("detected_events").get<std::int64_t>();
            r.true_positives = o.at("true_positives").get<std::int64_t>();
            r.missed_events = o.at("missed_events").get<std::int64_t>();
            r.false_positive_events = o.at("false_positive_events").get<std::int64_t>();
            r.precision = o.at("precision").get<double>();
            r.recall = o.at("recall").get<double>();
            r.f1 = o.at("f1").get<double>();
            out.push_back(std::move(r));
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::DecodeError, std::string("bad report JSON: ") + e.what());
    }
}

}  // namespace pumpdet

#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "pumpdet/rolling.hpp"

namespace pumpdet {

enum class GateKind {
    TotalVolume30d,  // v > f * V_tot
    AvgDaily,        // v > f * V_avg
    Ewma,            // v > f * EWMA_d
    EwmaVolatility,  // v > f * EWMA_d + alpha * sigma_daily
};

/// Minimum-volume eligibility rule. Every kind also requires
/// v > frac_max * V_max over the trailing window.
struct EligibilityRule {
    GateKind kind = GateKind::Ewma;
    double frac_primary = 0.70;
    double frac_max = 0.60;
    int d_span = 10;     // EWMA kinds only
    double alpha = 2.0;  // EwmaVolatility only

    static EligibilityRule total_volume(double frac_primary = 0.30, double frac_max = 0.60);
    static EligibilityRule avg_daily(double frac_primary = 0.70, double frac_max = 0.60);
    static EligibilityRule ewma(int d_span = 10, double frac_primary = 0.70,
                                double frac_max = 0.60);
    static EligibilityRule ewma_volatility(int d_span = 10, double alpha = 2.0,
                                           double frac_primary = 0.70, double frac_max = 0.60);
    /// Default fractions for `kind`.
    static EligibilityRule defaults(GateKind kind, int d_span = 10, double alpha = 2.0);

    bool uses_ewma() const { return kind == GateKind::Ewma || kind == GateKind::EwmaVolatility; }

    /// Throws Error{InvalidArgument} when a field is out of range.
    void validate() const;

    friend bool operator==(const EligibilityRule&, const EligibilityRule&) = default;
};

std::string_view to_string(GateKind kind);
/// Accepts "total", "total_volume_30d", "avg_daily", "ewma", "ewma_volatility"
/// ('-' and '_' interchangeable, case-insensitive).
std::optional<GateKind> parse_gate_kind(std::string_view text);

/// Human-readable label, e.g. "EWMA-Volatility (d=10, alpha=2)".
std::string describe(const EligibilityRule& rule);

/// nullopt when an EWMA rule has no complete trailing day to compare against.
std::optional<bool> eligibility(double volume, const RollingContext& ctx,
                                const EligibilityRule& rule);

/// Same decision; throws Error{MissingContext} where eligibility() is nullopt.
bool is_eligible(double volume, const RollingContext& ctx, const EligibilityRule& rule);

}  // namespace pumpdet

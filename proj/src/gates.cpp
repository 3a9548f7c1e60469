#include "pumpdet/gates.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "pumpdet/error.hpp"

namespace pumpdet {

EligibilityRule EligibilityRule::total_volume(double frac_primary, double frac_max) {
    return {GateKind::TotalVolume30d, frac_primary, frac_max, 10, 0.0};
}

EligibilityRule EligibilityRule::avg_daily(double frac_primary, double frac_max) {
    return {GateKind::AvgDaily, frac_primary, frac_max, 10, 0.0};
}

EligibilityRule EligibilityRule::ewma(int d_span, double frac_primary, double frac_max) {
    return {GateKind::Ewma, frac_primary, frac_max, d_span, 0.0};
}

EligibilityRule EligibilityRule::ewma_volatility(int d_span, double alpha, double frac_primary,
                                                 double frac_max) {
    return {GateKind::EwmaVolatility, frac_primary, frac_max, d_span, alpha};
}

EligibilityRule EligibilityRule::defaults(GateKind kind, int d_span, double alpha) {
    switch (kind) {
        case GateKind::TotalVolume30d: return total_volume();
        case GateKind::AvgDaily: return avg_daily();
        case GateKind::Ewma: return ewma(d_span);
        case GateKind::EwmaVolatility: return ewma_volatility(d_span, alpha);
    }
    return ewma(d_span);
}

void EligibilityRule::validate() const {
    if (!(frac_primary > 0.0 && frac_primary <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "frac_primary must be in (0, 1]");
    }
    if (!(frac_max > 0.0 && frac_max <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "frac_max must be in (0, 1]");
    }
    if (d_span < 1) throw Error(ErrorCode::InvalidArgument, "d_span must be >= 1");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw Error(ErrorCode::InvalidArgument, "alpha must be finite and >= 0");
    }
}

std::string_view to_string(GateKind kind) {
    switch (kind) {
        case GateKind::TotalVolume30d: return "total_volume_30d";
        case GateKind::AvgDaily: return "avg_daily";
        case GateKind::Ewma: return "ewma";
        case GateKind::EwmaVolatility: return "ewma_volatility";
    }
    return "unknown";
}

std::optional<GateKind> parse_gate_kind(std::string_view text) {
    std::string key;
    for (char ch : text) {
        key.push_back(ch == '-' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
    if (key == "total" || key == "total_volume" || key == "total_volume_30d") {
        return GateKind::TotalVolume30d;
    }
    if (key == "avg" || key == "avg_daily" || key == "average_daily") return GateKind::AvgDaily;
    if (key == "ewma") return GateKind::Ewma;
    if (key == "ewma_volatility" || key == "ewma_vol" || key == "volatility") {
        return GateKind::EwmaVolatility;
    }
    return std::nullopt;
}

std::string describe(const EligibilityRule& rule) {
    std::ostringstream out;
    switch (rule.kind) {
        case GateKind::TotalVolume30d: out << "Total Volume 30d"; break;
        case GateKind::AvgDaily: out << "Average Daily Volume"; break;
        case GateKind::Ewma: out << "EWMA (d=" << rule.d_span << ")"; break;
        case GateKind::EwmaVolatility:
            out << "EWMA-Volatility (d=" << rule.d_span << ", alpha=" << rule.alpha << ")";
            break;
    }
    return out.str();
}

std::optional<bool> eligibility(double volume, const RollingContext& ctx,
                                const EligibilityRule& rule) {
    double floor = 0.0;
    switch (rule.kind) {
        case GateKind::TotalVolume30d: floor = rule.frac_primary * ctx.v_tot; break;
        case GateKind::AvgDaily: floor = rule.frac_primary * ctx.v_avg_daily; break;
        case GateKind::Ewma:
            if (ctx.complete_days == 0) return std::nullopt;
            floor = rule.frac_primary * ctx.ewma_daily;
            break;
        case GateKind::EwmaVolatility:
            if (ctx.complete_days == 0) return std::nullopt;
            floor = rule.frac_primary * ctx.ewma_daily + rule.alpha * ctx.sigma_daily;
            break;
    }
    return volume > floor && volume > rule.frac_max * ctx.v_max;
}

bool is_eligible(double volume, const RollingContext& ctx, const EligibilityRule& rule) {
    const auto decision = eligibility(volume, ctx, rule);
    if (!decision) {
        throw Error(ErrorCode::MissingContext,
                    std::string(to_string(rule.kind)) + " gate needs a complete trailing day");
    }
    return *decision;
}

}  // namespace pumpdet

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pumpdet/ingestion.hpp"
#include "pumpdet/marketdata.hpp"

namespace pumpdet {

enum class Profile {
    Dormant,  // zero volume, flat price
    Blippy,   // dormant plus small fixed-interval trades at an unchanged price
    Regular,  // lognormal hourly volume, small price noise
};

std::string_view to_string(Profile profile);
std::optional<Profile> parse_profile(std::string_view text);

/// A pump candle gets
///   high   = pump_price_mult  * mean open of the 12 preceding candles
///   volume = pump_volume_mult * max(volume of the 24 preceding candles, base_hourly_volume)
/// and the price reverts to its pre-pump level over the next two candles.
struct ScenarioSpec {
    std::string symbol = "SYN_USDT";
    std::uint64_t seed = 1;
    Profile profile = Profile::Regular;
    Timestamp start = Timestamp{std::chrono::sys_days{std::chrono::year{2024} / 8 / 15}};
    int span_days = 30;
    double base_price = 1.0;
    double base_hourly_volume = 100.0;
    std::vector<Timestamp> pump_times;
    double pump_price_mult = 4.0;
    double pump_volume_mult = 3.0;
    int blip_interval_hours = 72;
    double blip_volume = 1.0;
    double volume_log_sigma = 0.5;
    double price_noise = 0.002;  // per-candle log-return stddev

    /// Throws Error{InvalidSpec}. Pumps must sit at least 24 hours after
    /// `start`, inside the span, at least 3 hours apart.
    void validate() const;
};

struct Scenario {
    SymbolSeries series;
    std::vector<GroundTruthEvent> truth;
};

/// Deterministic for a fixed spec, independent of platform: draws come from
/// std::mt19937_64 through a local Box-Muller transform.
Scenario generate(const ScenarioSpec& spec);

/// Many independent scenarios: symbol `<prefix><index>` (zero-padded), seed
/// `template.seed + index`, and `pumps_per_symbol` pumps starting
/// `first_pump_hour` hours in, spaced `pump_spacing_hours` apart and shifted
/// by a per-symbol hour offset.
struct CorpusSpec {
    ScenarioSpec base;
    int symbols = 10;
    std::string prefix = "SYN";
    std::string suffix = "_USDT";
    int pumps_per_symbol = 0;
    int first_pump_hour = 31 * 24;
    int pump_spacing_hours = 35 * 24;
};

std::vector<Scenario> generate_corpus(const CorpusSpec& spec);

}  // namespace pumpdet

#include "pumpdet/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <random>

#include "pumpdet/error.hpp"

namespace pumpdet {

std::string_view to_string(Profile profile) {
    switch (profile) {
        case Profile::Dormant: return "dormant";
        case Profile::Blippy: return "blippy";
        case Profile::Regular: return "regular";
    }
    return "unknown";
}

std::optional<Profile> parse_profile(std::string_view text) {
    std::string key;
    for (char ch : text) key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    if (key == "dormant") return Profile::Dormant;
    if (key == "blippy") return Profile::Blippy;
    if (key == "regular") return Profile::Regular;
    return std::nullopt;
}

void ScenarioSpec::validate() const {
    const auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidSpec, msg); };
    if (symbol.empty()) fail("symbol is empty");
    if (span_days < 1) fail("span_days must be >= 1");
    if (!(base_price > 0.0) || !std::isfinite(base_price)) fail("base_price must be positive");
    if (!(base_hourly_volume >= 0.0)) fail("base_hourly_volume must be >= 0");
    if (!(pump_price_mult > 1.0)) fail("pump_price_mult must be > 1");
    if (!(pump_volume_mult > 1.0)) fail("pump_volume_mult must be > 1");
    if (blip_interval_hours < 1) fail("blip_interval_hours must be >= 1");
    if (!(blip_volume >= 0.0)) fail("blip_volume must be >= 0");
    if (!(volume_log_sigma >= 0.0)) fail("volume_log_sigma must be >= 0");
    if (!(price_noise >= 0.0) || price_noise > 0.1) fail("price_noise must be in [0, 0.1]");
    if (floor_hour(start) != start) fail("start must be hour-aligned");

    const Timestamp end = start + std::chrono::days(span_days);
    std::vector<Timestamp> pumps;
    for (auto t : pump_times) pumps.push_back(floor_hour(t));
    std::sort(pumps.begin(), pumps.end());
    for (std::size_t i = 0; i < pumps.size(); ++i) {
        if (pumps[i] < start + std::chrono::hours(24) || pumps[i] >= end) {
            fail("pump at " + format_rfc3339(pumps[i]) + " outside the usable span");
        }
        if (i > 0 && pumps[i] - pumps[i - 1] < std::chrono::hours(3)) {
            fail("pumps closer than 3 hours apart");
        }
    }
}

namespace {

class Gaussian {
public:
    explicit Gaussian(std::uint64_t seed) : rng_(seed) {}

    double uniform() { return (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53; }

    double next() {
        if (spare_) {
            const double v = *spare_;
            spare_.reset();
            return v;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double theta = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(theta);
        return r * std::cos(theta);
    }

private:
    std::mt19937_64 rng_;
    std::optional<double> spare_;
};

Candle make_candle(Timestamp t, double open, double close, double wick, double volume) {
    const double hi = std::max(open, close) * (1.0 + wick);
    const double lo = std::min(open, close) * std::max(0.0, 1.0 - wick);
    return Candle{t, open, hi, lo, close, volume, false};
}

}  // namespace

Scenario generate(const ScenarioSpec& spec) {
    spec.validate();
    const auto hours = static_cast<std::size_t>(spec.span_days) * 24;

    std::vector<std::size_t> pump_index;
    for (auto t : spec.pump_times) {
        pump_index.push_back(static_cast<std::size_t>((floor_hour(t) - spec.start) / kHour));
    }
    std::sort(pump_index.begin(), pump_index.end());

    Gaussian gauss(spec.seed);
    const double sigma = spec.volume_log_sigma;
    const double log_base = std::log(spec.base_price);

    Scenario out;
    out.series.symbol = spec.symbol;
    auto& candles = out.series.candles;
    candles.reserve(hours);

    double price = spec.base_price;
    std::size_t next_pump = 0;
    std::size_t revert_left = 0;
    double revert_target = price;
    double pump_volume = 0.0;

    for (std::size_t i = 0; i < hours; ++i) {
        const Timestamp t = spec.start + std::chrono::hours(static_cast<std::int64_t>(i));
        const double open = price;

        if (next_pump < pump_index.size() && pump_index[next_pump] == i) {
            ++next_pump;
            double sma_open = 0.0;
            const std::size_t lag = std::min<std::size_t>(12, i);
            for (std::size_t k = i - lag; k < i; ++k) sma_open += candles[k].open;
            sma_open /= static_cast<double>(lag);
            double trailing = 0.0;
            for (std::size_t k = i - 24; k < i; ++k) trailing += candles[k].volume;

            const double high = spec.pump_price_mult * sma_open;
            pump_volume = spec.pump_volume_mult * std::max(trailing, spec.base_hourly_volume);
            const double close = open + 0.4 * (high - open);
            candles.push_back(Candle{t, open, high, std::min(open, close), close, pump_volume, false});
            revert_target = open;
            revert_left = 2;
            price = close;
            continue;
        }

        if (revert_left > 0) {
            // Dump: halfway back, then all the way back.
            const double close = revert_left == 2 ? 0.5 * (open + revert_target) : revert_target;
            const double volume = pump_volume / (revert_left == 2 ? 4.0 : 16.0);
            candles.push_back(Candle{t, open, open, close, close, volume, false});
            --revert_left;
            price = close;
            continue;
        }

        switch (spec.profile) {
            case Profile::Dormant:
                candles.push_back(Candle{t, open, open, open, open, 0.0, false});
                break;
            case Profile::Blippy: {
                const bool blip = i > 0 && i % static_cast<std::size_t>(spec.blip_interval_hours) == 0;
                candles.push_back(Candle{t, open, open, open, open, blip ? spec.blip_volume : 0.0, false});
                break;
            }
            case Profile::Regular: {
                const double z_price = gauss.next();
                const double z_wick = gauss.next();
                const double z_vol = gauss.next();
                // Mild pull toward base_price keeps long spans stationary.
                const double drift = -0.01 * (std::log(open) - log_base);
                const double close = open * std::exp(drift + spec.price_noise * z_price);
                const double wick = 0.5 * spec.price_noise * std::abs(z_wick);
                const double volume =
                    spec.base_hourly_volume * std::exp(sigma * z_vol - 0.5 * sigma * sigma);
                candles.push_back(make_candle(t, open, close, wick, volume));
                price = close;
                break;
            }
        }
    }

    for (std::size_t idx : pump_index) {
        out.truth.push_back(GroundTruthEvent{spec.symbol, candles[idx].timestamp, "synthetic"});
    }
    return out;
}

std::vector<Scenario> generate_corpus(const CorpusSpec& spec) {
    if (spec.symbols < 1) throw Error(ErrorCode::InvalidSpec, "corpus needs at least one symbol");
    if (spec.pumps_per_symbol < 0) throw Error(ErrorCode::InvalidSpec, "pumps_per_symbol < 0");
    const int width = static_cast<int>(std::to_string(spec.symbols - 1).size());

    std::vector<Scenario> out;
    out.reserve(static_cast<std::size_t>(spec.symbols));
    for (int k = 0; k < spec.symbols; ++k) {
        ScenarioSpec s = spec.base;
        std::string index = std::to_string(k);
        index.insert(0, static_cast<std::size_t>(width) - index.size(), '0');
        s.symbol = spec.prefix + index + spec.suffix;
        s.seed = spec.base.seed + static_cast<std::uint64_t>(k);
        s.pump_times.clear();
        const int offset = (k * 7) % 24;
        for (int j = 0; j < spec.pumps_per_symbol; ++j) {
            s.pump_times.push_back(
                s.start + std::chrono::hours(spec.first_pump_hour + offset +
                                             j * spec.pump_spacing_hours));
        }
        out.push_back(generate(s));
    }
    return out;
}

}  // namespace pumpdet

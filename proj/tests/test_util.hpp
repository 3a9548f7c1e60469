#pragma once

#include <chrono>
#include <filesystem>
#include <random>
#include <string>

#include "pumpdet/marketdata.hpp"

namespace testutil {

inline pumpdet::Timestamp t0() {
    return pumpdet::Timestamp{std::chrono::sys_days{std::chrono::year{2024} / 8 / 15}};
}

inline pumpdet::Timestamp hour(long h) { return t0() + std::chrono::hours(h); }

inline pumpdet::Candle flat(long h, double price, double volume) {
    return pumpdet::Candle{hour(h), price, price, price, price, volume, false};
}

/// Unique scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("pumpdet-test-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace testutil

#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "pumpdet/transport.hpp"

namespace pumpdet {

inline constexpr const char* kBaseUrlEnv = "PUMPDET_BASE_URL";
inline constexpr const char* kDefaultBaseUrl = "https://api.poloniex.com";

/// Blocking HTTP(S) transport. `base_url` is scheme://host[:port][/prefix];
/// request paths are appended to the prefix.
class HttpTransport final : public Transport {
public:
    explicit HttpTransport(const std::string& base_url,
                           std::chrono::seconds timeout = std::chrono::seconds(30));
    ~HttpTransport() override;

    HttpResponse get(const std::string& path, const QueryParams& query) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// $PUMPDET_BASE_URL if set and non-empty, else `fallback`.
std::string resolve_base_url(const std::string& fallback = kDefaultBaseUrl);

}  // namespace pumpdet

#include "pumpdet/http_transport.hpp"

#include <cstdlib>

#include <httplib.h>

#include "pumpdet/error.hpp"

namespace pumpdet {

struct HttpTransport::Impl {
    std::unique_ptr<httplib::Client> client;
    std::string prefix;
};

HttpTransport::HttpTransport(const std::string& base_url, std::chrono::seconds timeout)
    : impl_(std::make_unique<Impl>()) {
    const auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(ErrorCode::InvalidArgument, "base URL needs a scheme: " + base_url);
    }
    const auto path_start = base_url.find('/', scheme_end + 3);
    const std::string host = base_url.substr(0, path_start);
    if (path_start != std::string::npos) {
        impl_->prefix = base_url.substr(path_start);
        while (!impl_->prefix.empty() && impl_->prefix.back() == '/') impl_->prefix.pop_back();
    }
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (host.rfind("https://", 0) == 0) {
        throw Error(ErrorCode::InvalidArgument, "built without TLS support: " + base_url);
    }
#endif
    impl_->client = std::make_unique<httplib::Client>(host);
    impl_->client->set_connection_timeout(timeout);
    impl_->client->set_read_timeout(timeout);
    impl_->client->set_follow_location(true);
}

HttpTransport::~HttpTransport() = default;

HttpResponse HttpTransport::get(const std::string& path, const QueryParams& query) {
    httplib::Params params(query.begin(), query.end());
    auto result = impl_->client->Get(impl_->prefix + path, params, httplib::Headers{});
    if (!result) {
        throw Error(ErrorCode::NetworkError,
                    "GET " + path + " failed: " + httplib::to_string(result.error()));
    }
    return HttpResponse{result->status, result->body};
}

std::string resolve_base_url(const std::string& fallback) {
    if (const char* env = std::getenv(kBaseUrlEnv); env != nullptr && *env != '\0') return env;
    return fallback;
}

}  // namespace pumpdet

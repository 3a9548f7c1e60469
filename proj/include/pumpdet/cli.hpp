#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "pumpdet/transport.hpp"

namespace pumpdet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitOperational = 1;
inline constexpr int kExitUsage = 2;

/// Seams for tests: where network transports and time come from.
struct Environment {
    std::function<std::unique_ptr<Transport>(const std::string& base_url)> make_transport;
    Clock* clock = nullptr;  // defaults to the system clock
};

/// Runs one command line (args[0] is the program name). Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const Environment& env = {});

}  // namespace pumpdet::cli

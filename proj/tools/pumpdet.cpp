#include <iostream>
#include <string>
#include <vector>

#include "pumpdet/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return pumpdet::cli::run(args, std::cout, std::cerr);
}

#include <iostream>

#include "tissue_optics/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return tissue_optics::cli::run_cli(args, std::cout, std::cerr);
}

#include <iostream>
#include <vector>

#include "pimbs/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return pimbs::cli_run(args, std::cout, std::cerr);
}

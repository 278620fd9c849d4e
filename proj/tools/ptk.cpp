#include <iostream>

#include "ptk/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return ptk::run_cli(args, std::cout, std::cerr);
}

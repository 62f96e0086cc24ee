#include <iostream>
#include <string>
#include <vector>

#include "mixedrank/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return mixedrank::run_cli(args, std::cout, std::cerr);
}

#include <iostream>

#include "geomine/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return geomine::run_cli(args, std::cout, std::cerr);
}

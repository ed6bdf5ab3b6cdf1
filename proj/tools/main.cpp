#include <iostream>
#include <string>
#include <vector>

#include "mrw/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return mrw::cli::run_command(args, std::cin, std::cout, std::cerr);
}

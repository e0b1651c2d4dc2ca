#include <iostream>
#include <string>
#include <vector>

#include "tyshrink/cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv, argv + argc);
    return tyshrink::cli::run(args, std::cout, std::cerr);
}

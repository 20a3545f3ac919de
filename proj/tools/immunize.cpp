#include <iostream>
#include <string>
#include <vector>

#include "immunize/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return immunize::cli::run(args, std::cout, std::cerr);
}

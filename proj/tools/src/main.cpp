#include "degenctl_cli/commands.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return degenctl::cli::run(argc, argv, std::cout, std::cerr);
}

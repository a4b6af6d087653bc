#include <iostream>
#include <vector>

#include "gridguard/cli.hpp"

int main(int argc, char** argv) {
    return gridguard::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}

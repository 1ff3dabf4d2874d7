#include "edmraim/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return edm::cli::run(argc, argv, std::cout, std::cerr);
}

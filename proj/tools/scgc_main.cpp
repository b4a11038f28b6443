#include "scgc/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return scgc::cli_main(argc, argv, std::cout, std::cerr);
}

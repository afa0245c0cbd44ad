#include <iostream>

#include "sigloop/io/cli.hpp"

int main(int argc, char** argv) {
    return sigloop::io::run_cli(argc, argv, std::cout, std::cerr);
}

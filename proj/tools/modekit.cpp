#include <iostream>

#include "modekit/cli.hpp"

int main(int argc, char** argv) { return modekit::run_cli(argc, argv, std::cout, std::cerr); }

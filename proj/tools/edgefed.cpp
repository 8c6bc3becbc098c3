#include <iostream>

#include "edgefed/cli/cli.hpp"

int main(int argc, char** argv) { return edgefed::cli::run_cli(argc, argv, std::cout, std::cerr); }

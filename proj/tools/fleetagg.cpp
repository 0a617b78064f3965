#include <iostream>

#include "fleetagg/cli.hpp"

int main(int argc, char** argv) { return fleetagg::cli::run(argc, argv, std::cout, std::cerr); }

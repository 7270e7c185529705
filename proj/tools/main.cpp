#include <iostream>

#include "prsim/cli.hpp"

int main(int argc, char** argv) { return prsim::run_cli(argc, argv, std::cout, std::cerr); }

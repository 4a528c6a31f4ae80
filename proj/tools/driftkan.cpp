#include <iostream>

#include "driftkan/cli.hpp"

int main(int argc, char** argv) { return driftkan::run_cli(argc, argv, std::cout, std::cerr); }

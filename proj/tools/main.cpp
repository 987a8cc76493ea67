#include <iostream>

#include "capmax/cli.hpp"

int main(int argc, char** argv) { return capmax::run_cli(argc, argv, std::cout, std::cerr); }

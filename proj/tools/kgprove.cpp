#include <iostream>

#include "kgprover/cli.hpp"

int main(int argc, char** argv) { return kgp::run_cli(argc, argv, std::cout, std::cerr); }

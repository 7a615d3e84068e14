#include <iostream>

#include "vdsa/cli.hpp"

int main(int argc, char** argv) { return vdsa::run_cli(argc, argv, std::cout, std::cerr); }

#include <iostream>

#include "lsmimo/cli.hpp"

int main(int argc, char** argv) { return lsmimo::run_cli(argc, argv, std::cout, std::cerr); }

#include "oneat/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return oneat::run_cli(argc, argv, std::cout, std::cerr); }

#include <iostream>

#include "pamforge/cli.hpp"

int main(int argc, char** argv) { return pamforge::run_cli(argc, argv, std::cout, std::cerr); }

#include <iostream>

#include "sa_lab/cli.hpp"

int main(int argc, char** argv) { return sa_lab::run_cli(argc, argv, std::cout, std::cerr); }

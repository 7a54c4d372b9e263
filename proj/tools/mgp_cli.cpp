#include <iostream>

#include "mgp/cli.hpp"

int main(int argc, char** argv) { return mgp::run_cli(argc, argv, std::cout, std::cerr); }

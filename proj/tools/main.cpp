#include "scoring/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return scoring::run_cli(argc, argv, std::cout, std::cerr); }

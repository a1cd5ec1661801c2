#include <iostream>

#include "xube/app/cli.hpp"

int main(int argc, char** argv) { return xube::app::run_cli(argc, argv, std::cin, std::cout, std::cerr); }

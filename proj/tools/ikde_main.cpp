#include "ikde/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return ikde::run_cli(argc, argv, std::cout, std::cerr); }

#include <iostream>

#include "railyard/cli/cli.hpp"

int main(int argc, char** argv) { return railyard::cli::main_entry(argc, argv, std::cout, std::cerr); }

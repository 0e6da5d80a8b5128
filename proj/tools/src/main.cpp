#include <iostream>

#include "locomo/cli/commands.hpp"

int main(int argc, char** argv) { return locomo::cli::main_entry(argc, argv, std::cout, std::cerr); }

#include <iostream>

#include "amenable/cli_io.hpp"

int main(int argc, char** argv) { return amenable::cli::main_entry(argc, argv, std::cout, std::cerr); }

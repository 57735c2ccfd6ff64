#include <iostream>

#include "nonmark/cli.hpp"

int main(int argc, char** argv) { return nonmark::cli::main(argc, argv, std::cout, std::cerr); }

#include <iostream>

#include "respmon/cli.hpp"

int main(int argc, char** argv) { return respmon::cli::main(argc, argv, std::cout, std::cerr); }

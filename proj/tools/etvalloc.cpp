#include <iostream>

#include "etv/cli/commands.hpp"

int main(int argc, char** argv) { return etv::cli::run(argc, argv, std::cout, std::cerr); }

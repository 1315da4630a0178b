#include <iostream>

#include "wdiv/cli.hpp"

int main(int argc, char** argv) { return wdiv::cli::run(argc, argv, std::cout, std::cerr); }

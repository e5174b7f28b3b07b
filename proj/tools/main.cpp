#include <iostream>

#include "bic/cli.hpp"

int main(int argc, char** argv) { return bic::cli::run(argc, argv, std::cout, std::cerr); }

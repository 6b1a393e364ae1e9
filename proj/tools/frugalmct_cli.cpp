#include <iostream>

#include "frugalmct/cli.hpp"

int main(int argc, char** argv) { return frugalmct::cli::run(argc, argv, std::cout, std::cerr); }

#include <iostream>

#include "cvblab/cli.hpp"

int main(int argc, char **argv) { return cvb::cli::run(argc, argv, std::cout, std::cerr); }

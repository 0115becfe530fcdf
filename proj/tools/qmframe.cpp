#include <iostream>

#include "qmframe/cli.hpp"

int main(int argc, char** argv) { return qmframe::cli::run(argc, argv, std::cout, std::cerr); }

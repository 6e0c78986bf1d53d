#include <iostream>

#include "coopt/cli.hpp"

int main(int argc, char** argv) {
  return coopt::cli::main(argc, argv, std::cout, std::cerr);
}

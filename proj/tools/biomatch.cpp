#include <iostream>

#include "biomatch/cli.hpp"

int main(int argc, char** argv) {
  return biomatch::cli::run_cli(argc, argv, std::cout, std::cerr);
}

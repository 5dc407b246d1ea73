#include <iostream>

#include "amtl/cli.hpp"

int main(int argc, char** argv) {
  return amtl::run_cli(argc, argv, std::cout, std::cerr);
}

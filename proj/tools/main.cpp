#include <iostream>

#include "wavedecay/cli.hpp"

int main(int argc, char** argv) {
  return wavedecay::run_cli(argc, argv, std::cout, std::cerr);
}

#include <iostream>

#include "ratekit/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ratekit::run_cli(args, std::cout, std::cerr);
}

#include <iostream>

#include "convextest/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return convextest::run_cli(args, std::cout, std::cerr);
}

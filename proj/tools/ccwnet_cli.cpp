#include <iostream>
#include <string>
#include <vector>

#include "ccwnet/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return ccwnet::run_cli(args, std::cout, std::cerr);
}

#include <iostream>

#include "pmx/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return pmx::runCli(args, std::cout, std::cerr);
}

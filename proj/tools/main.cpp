#include <iostream>
#include <string>
#include <vector>

#include "stabcap/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return stabcap::run_cli(args, std::cout, std::cerr);
}

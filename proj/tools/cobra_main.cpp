#include <iostream>
#include <string>
#include <vector>

#include "cobra/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return cobra::run_cli(args, std::cout, std::cerr);
}

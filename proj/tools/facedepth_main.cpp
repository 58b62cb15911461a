#include <iostream>
#include <string>
#include <vector>

#include "facedepth/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return facedepth::run_cli(args, std::cout, std::cerr);
}

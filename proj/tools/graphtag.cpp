#include <iostream>
#include <string>
#include <vector>

#include "graphtag/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return graphtag::run_cli(args, std::cout, std::cerr);
}

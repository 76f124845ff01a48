#include <iostream>
#include <string>
#include <vector>

#include "snlm/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return snlm::cli_main(args, std::cout, std::cerr);
}

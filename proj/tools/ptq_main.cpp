#include <iostream>
#include <string>
#include <vector>

#include "ptq/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return ptq::cli::run(args, std::cout, std::cerr);
}

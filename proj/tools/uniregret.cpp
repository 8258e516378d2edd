#include <iostream>
#include <string>
#include <vector>

#include "uniregret/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return uniregret::cli::run(args, std::cout, std::cerr);
}

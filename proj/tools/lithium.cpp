#include <iostream>

#include "lithium/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return lithium::cli::run(args, std::cout, std::cerr);
}

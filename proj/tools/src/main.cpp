#include <iostream>
#include <string>
#include <vector>

#include "scoped_cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return scoped::cli::run(args, std::cout, std::cerr);
}

#include <iostream>
#include <string>
#include <vector>

#include "flightcore/cli/commands.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return flightcore::cli::run_cli(args, std::cin, std::cout, std::cerr);
}

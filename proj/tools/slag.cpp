// SPDX-License-Identifier: MIT
#include <iostream>

#include "slag_cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return slag::cli::run(args, std::cout, std::cerr);
}

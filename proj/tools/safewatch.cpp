#include <iostream>
#include <string>
#include <vector>

#include "safewatch/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return safewatch::cli::run(args, std::cout, std::cerr);
}

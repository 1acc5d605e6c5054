#include <iostream>

#include "poisonbench/bench/cli.hpp"

int main(int argc, char** argv) {
  return poisonbench::cli_main({argv + 1, argv + argc}, std::cout, std::cerr);
}

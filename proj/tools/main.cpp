#include <iostream>

#include "shipa/cli.hpp"

int main(int argc, char** argv) {
  return shipa::run_cli({argv, argv + argc}, std::cout, std::cerr);
}

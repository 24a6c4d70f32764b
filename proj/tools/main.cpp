#include <iostream>

#include "cpfjd/cli_driver.hpp"

int main(int argc, char** argv) {
  return cpfjd::run_cli(argc, argv, std::cout, std::cerr);
}

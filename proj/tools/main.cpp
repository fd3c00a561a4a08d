#include <iostream>

#include "rgkit/cli.hpp"

int main(int argc, char** argv) {
  return rgkit::cli::main_entry(argc, argv, std::cout, std::cerr);
}

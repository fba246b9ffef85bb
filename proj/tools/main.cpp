#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
  return ghostmark::tools::run(argc, argv, std::cout, std::cerr);
}

#include <iostream>
#include <string>
#include <vector>

#include "gbmred/cli.hpp"

int main(int argc, char** argv) {
  return gbmred::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}

#include <iostream>

#include "scottlab/cli.hpp"

int main(int argc, char** argv) {
  return scottlab::dispatch(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}

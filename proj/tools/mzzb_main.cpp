#include <iostream>
#include <string>
#include <vector>

#include "mzzb/cli.hpp"

int main(int argc, char** argv) {
  return mzzb::run_cli(std::vector<std::string>(argv, argv + argc), std::cerr);
}

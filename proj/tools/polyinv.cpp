#include <string>
#include <vector>

#include "polyinv/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return polyinv::cli::run(std::move(args));
}

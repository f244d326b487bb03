#include <iostream>
#include <string>
#include <vector>

#include "cli.hpp"

int main(int argc, char** argv) {
  svss::cli::apply_thread_env();
  std::vector<std::string> args(argv + 1, argv + argc);
  return svss::cli::run(args, std::cout, std::cerr);
}

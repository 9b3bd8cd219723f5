#include <iostream>
#include <string>
#include <vector>

#include "trtcli/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return trt::cli::run(args, std::cout, std::cerr);
}

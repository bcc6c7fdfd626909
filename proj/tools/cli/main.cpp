#include <iostream>

#include "app.hpp"

int main(int argc, char** argv) {
  return osslc::cli::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}

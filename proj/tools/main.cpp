#include <vector>

#include "cnr/cli.hpp"

int main(int argc, char** argv) {
  return cnr::cli_main(std::vector<std::string>(argv + 1, argv + argc));
}

#include <string>
#include <vector>

#include "modsafe/cli_app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return modsafe::run_cli(args);
}

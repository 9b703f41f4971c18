#include <iostream>
#include <string>
#include <vector>

#include "terrarank/cli.hpp"

extern char** environ;

int main(int argc, char** argv) {
  terrarank::EnvMap env;
  for (char** e = environ; e && *e; ++e) {
    const std::string entry(*e);
    const auto eq = entry.find('=');
    if (eq != std::string::npos && entry.rfind("TERRARANK_", 0) == 0) {
      env.emplace(entry.substr(0, eq), entry.substr(eq + 1));
    }
  }
  const std::vector<std::string> args(argv + 1, argv + argc);
  return terrarank::run_cli(args, std::cout, std::cerr, env);
}

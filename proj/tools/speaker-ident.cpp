#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "patrec/cli/speaker_ident.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return patrec::cli::speaker_ident_main(args, {std::cin, std::cout, std::cerr, std::filesystem::current_path()});
}

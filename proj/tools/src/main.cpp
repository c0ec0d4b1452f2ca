#include <iostream>

#include "relay/cli/commands.hpp"

int main(int argc, char** argv) { return relay::cli::run_cli(argc, argv, std::cout, std::cerr); }

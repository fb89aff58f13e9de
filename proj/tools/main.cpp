#include <iostream>

#include "hoaxnet/cli.hpp"

int main(int argc, char** argv) { return hoaxnet::run_cli(argc, argv, std::cout, std::cerr); }

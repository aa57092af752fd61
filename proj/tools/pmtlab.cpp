#include <iostream>

#include "pmt/cli.hpp"

int main(int argc, char** argv) { return pmt::run_cli(argc, argv, std::cout, std::cerr); }

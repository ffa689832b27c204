#include "certledger/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return certledger::run_cli(argc, argv, std::cout, std::cerr); }

#include <iostream>

#include "pemq/cli.hpp"

int main(int argc, char** argv) { return pemq::run_cli(argc, argv, std::cout, std::cerr); }

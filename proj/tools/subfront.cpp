#include <iostream>

#include "subfront/harness.hpp"

int main(int argc, char** argv) { return subfront::harness::run_cli(argc, argv, std::cout, std::cerr); }

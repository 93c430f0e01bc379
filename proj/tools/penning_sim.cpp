#include <iostream>

#include "penning/run.hpp"

int main(int argc, char** argv) { return penning::run_cli(argc, argv, std::cout, std::cerr); }

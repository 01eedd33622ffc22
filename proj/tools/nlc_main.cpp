#include "nlc/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return nlc::main_entry(argc, argv, std::cout, std::cerr); }

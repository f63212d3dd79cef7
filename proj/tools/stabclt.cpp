#include <iostream>

#include "stabclt/app.hpp"

int main(int argc, char** argv) { return stabclt::run_cli(argc, argv, std::cout, std::cerr); }

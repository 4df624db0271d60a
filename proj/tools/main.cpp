#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return scatter::run(argc, argv, std::cout); }

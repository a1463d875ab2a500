#include <iostream>

#include "roadgraph/cli.hpp"

int main(int argc, char** argv) { return roadgraph::cli::run(argc, argv, std::cout, std::cerr); }

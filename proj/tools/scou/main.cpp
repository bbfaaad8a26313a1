#include <iostream>

#include "scou/app.hpp"

int main(int argc, char** argv) { return scou::cli::run(argc, argv, std::cout, std::cerr); }

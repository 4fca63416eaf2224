#include "msvar/cli_io.hpp"

#include <iostream>

int main(int argc, char** argv) { return msvar::cli_main(argc, argv, std::cout, std::cerr); }

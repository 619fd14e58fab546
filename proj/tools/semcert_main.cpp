#include <iostream>

#include "semcert/cli.hpp"

int main(int argc, char** argv) { return semcert::run_cli(argc, argv, std::cout, std::cerr); }

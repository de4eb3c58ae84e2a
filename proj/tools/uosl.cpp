#include <iostream>

#include "uosl/app.hpp"

int main(int argc, char** argv) { return uosl::app::run_cli(argc, argv, std::cout, std::cerr); }

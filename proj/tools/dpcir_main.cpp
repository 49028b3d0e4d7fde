// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return slp::cli::dpcir_main(argc, argv, std::cout, std::cerr); }

#include "regcoc/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return regcoc::cli::run_cli(argc, argv, std::cout, std::cerr);
}

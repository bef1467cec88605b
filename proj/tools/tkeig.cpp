#include "tkeig/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return tkeig::cli_main(argc, argv, std::cout, std::cerr);
}

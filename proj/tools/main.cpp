#include <iostream>

#include "hde/cli.hpp"

int main(int argc, char** argv)
{
    return hde::cli::main(argc, argv, std::cout, std::cerr);
}

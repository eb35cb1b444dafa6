#include <iostream>

#include "opo/commands.hpp"

int main(int argc, char** argv) {
    return opo::run_cli(argc, argv, std::cerr);
}

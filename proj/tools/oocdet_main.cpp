#include "ooc/cli.hpp"

int main(int argc, char** argv) {
    return ooc::cli::run(argc, argv);
}

#include "aggnet/cli.hpp"

int main(int argc, char** argv) {
    return aggnet::cli::run(argc, argv);
}

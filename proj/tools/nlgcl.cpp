#include "nlgcl/cli.hpp"

int main(int argc, char** argv) {
    return nlgcl::run_cli(argc, argv);
}

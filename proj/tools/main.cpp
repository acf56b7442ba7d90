#include "phifem/cli.hpp"

int main(int argc, char **argv) {
    return phifem::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}

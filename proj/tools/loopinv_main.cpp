#include "loopinv/cli.hpp"

int main(int argc, char** argv) { return loopinv::run_cli(argc, argv); }

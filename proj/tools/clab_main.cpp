#include "clab/cli.hpp"

int main(int argc, char** argv) { return clab::run_cli(argc, argv); }

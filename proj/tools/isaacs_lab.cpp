#include "ilab/harness/cli.hpp"

int main(int argc, char** argv) { return ilab::harness::run_cli(argc, argv); }

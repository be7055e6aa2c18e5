#include "netpatch/cli.hpp"

int main(int argc, char** argv) { return netpatch::run_cli(argc, argv); }

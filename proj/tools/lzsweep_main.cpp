#include "lzsweep/cli.hpp"

int main(int argc, char** argv) { return lzsweep::cli_main(argc, argv); }

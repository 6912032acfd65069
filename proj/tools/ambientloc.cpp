#include "ambientloc/cli.hpp"

int main(int argc, char** argv) { return ambientloc::run_cli(argc, argv); }

#include "fxtriplet/cli.hpp"

int main(int argc, char** argv) { return fxtriplet::run_cli(argc, argv); }

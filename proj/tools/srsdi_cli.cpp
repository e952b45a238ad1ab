// srsdi_cli.cpp: command-line entry point.

#include "srsdi/cli.hpp"

int main(int argc, char** argv) { return srsdi::run_cli(argc, argv); }

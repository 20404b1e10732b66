#include "conelab/cli.hpp"

int main(int argc, char** argv) { return conelab::experiment::run_cli(argc, argv); }

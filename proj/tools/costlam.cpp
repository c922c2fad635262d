#include "costlam/cli.hpp"

int main(int argc, char** argv) { return costlam::run_cli(argc, argv); }

#include "cascadelab/cli/commands.hpp"

int main(int argc, char** argv) { return cascadelab::cli::run_cli(argc, argv); }

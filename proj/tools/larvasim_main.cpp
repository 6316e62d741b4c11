#include "larvasim/cli.hpp"

int main(int argc, char** argv) { return larvasim::cli::run_command(argc, argv); }

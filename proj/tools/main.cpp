#include "fdual/cli.hpp"

int main(int argc, char** argv) { return fdual::cli::run(argc, argv); }

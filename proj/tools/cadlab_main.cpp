#include "cadlab/cli.hpp"

int main(int argc, char** argv) { return cadlab::cli::run(argc, argv); }

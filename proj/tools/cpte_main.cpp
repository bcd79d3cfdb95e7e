#include "cpte/cli.hpp"

int main(int argc, char** argv) { return cpte::cli::run(argc, argv); }

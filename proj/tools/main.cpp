#include "uwimg/cli.hpp"

int main(int argc, char** argv) { return uwimg::cli::run(argc, argv); }

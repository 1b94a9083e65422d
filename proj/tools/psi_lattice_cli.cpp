#include "psilat/cli.hpp"

int main(int argc, char** argv) { return psilat::cli::run(argc, argv); }

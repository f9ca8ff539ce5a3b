#include "feen/cli.hpp"

int main(int argc, char** argv) { return feen::cli::run(argc, argv); }

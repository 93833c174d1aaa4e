#include "cli.hpp"

int main(int argc, char** argv) { return ssbfsk::cli::run(argc, argv); }

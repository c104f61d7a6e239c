#include "regseg/cli.hpp"

int main(int argc, char** argv) { return regseg::cli::run(argc, argv); }

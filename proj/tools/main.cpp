#include "schemamatch/cli.hpp"

int main(int argc, char** argv) { return schemamatch::cli::execute({argv + 1, argv + argc}); }

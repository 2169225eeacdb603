#include "cli.hpp"

int main(int argc, char** argv) { return bgch::cli::run(argc, argv); }

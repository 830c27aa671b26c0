#include "vegspots/cli/commands.hpp"

int main(int argc, char** argv) { return vegspots::cli::run(argc, argv); }

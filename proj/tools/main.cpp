#include "commands.hpp"

int main(int argc, char** argv) { return hermrt::cli::run(argc, argv); }

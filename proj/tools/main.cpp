#include "cli.hpp"

int main(int argc, char** argv) { return optinet::cli::main(argc, argv); }

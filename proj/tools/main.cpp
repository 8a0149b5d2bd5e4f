#include "cli.hpp"

int main(int argc, char** argv) { return adalopo::cli::main_entry(argc, argv); }

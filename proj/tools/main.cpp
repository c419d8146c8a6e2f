#include "cli.hpp"

int main(int argc, char** argv) { return formation::cli_main(argc, argv); }

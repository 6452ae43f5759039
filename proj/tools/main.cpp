#include "doselim/cli.hpp"

int main(int argc, char** argv) { return doselim::cli_main(argc, argv); }

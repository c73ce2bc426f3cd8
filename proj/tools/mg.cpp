#include "cli.hpp"

int main(int argc, char** argv) { return mgcli::run_cli(argc, argv); }

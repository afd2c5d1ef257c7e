#include "evanno/cli.hpp"

int main(int argc, char** argv) { return evanno::run_cli(argc, argv); }

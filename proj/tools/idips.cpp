#include "idips/cli.hpp"

int main(int argc, char** argv) { return idips::run_cli(argc, argv); }

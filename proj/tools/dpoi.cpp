#include "dpoi/cli.hpp"

int main(int argc, char** argv) { return dpoi::run_cli(argc, argv); }

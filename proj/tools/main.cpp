#include "areal/cli.hpp"

int main(int argc, char** argv) { return areal::run_cli(argc, argv); }

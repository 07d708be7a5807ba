#include "parastab/cli.hpp"

int main(int argc, char** argv) { return parastab::run_cli(argc, argv); }

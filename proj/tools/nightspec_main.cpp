#include "nightspec/cli.hpp"

int main(int argc, char** argv) { return nightspec::run_cli(argc, argv); }
